"""Synthetic survey cohorts for desk-scale runs.

Class marginals, sex, race and mean-age profiles are calibrated to the
published cohort counts (``COHORT_COUNTS``).  Behavioural items are
generated from a latent Gaussian per item::

    z = loading * g + shift(class, aux) + eps,   g, eps ~ N(0, 1)

and cut into ordinal levels (or a yes/no answer).  ``g`` is shared by all
items of a row, which makes the items correlated.  The class shift has a
common part for any autism/ADHD diagnosis plus autism-specific
(social) and ADHD-specific (attention) parts; keeping the specific parts
small makes AutismOnly and AdhdOnly overlap while both stay separated from
None.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .rng import derive_rng
from .survey_data import (
    ADHD_ONLY, AUTISM_ONLY, AUX_CONDITIONS, BOTH, CLASS4_NAMES, NONE,
    CohortLabels, Codebook, ColumnSpec, FeatureGroup, SurveyTable, derive_labels,
)

RACE_LABELS = {
    1: "White",
    2: "Black or African American",
    3: "American Indian or Alaska Native",
    4: "Asian",
    5: "Native Hawaiian and Other Pacific Islander",
    6: "Other",
    7: "Multiple races",
}

# Published cohort counts: overall and per diagnosis class.
COHORT_COUNTS = {
    "Overall": {"n": 270978, "mean_age": 9.0, "male": 140233,
                "race": (208993, 18175, 2424, 15140, 1455, 2559, 22232)},
    "AutismOnly": {"n": 4315, "mean_age": 9.5, "male": 3344, "race": (3167, 370, 43, 239, 22, 44, 430)},
    "AdhdOnly": {"n": 22863, "mean_age": 12.3, "male": 15023, "race": (18400, 1759, 212, 382, 73, 143, 1894)},
    "Both": {"n": 3770, "mean_age": 11.9, "male": 2997, "race": (2995, 264, 33, 123, 19, 18, 318)},
}


def _none_profile() -> dict:
    o = COHORT_COUNTS["Overall"]
    rest = [COHORT_COUNTS[c] for c in ("AutismOnly", "AdhdOnly", "Both")]
    n = o["n"] - sum(r["n"] for r in rest)
    return {
        "n": n,
        "mean_age": (o["mean_age"] * o["n"] - sum(r["mean_age"] * r["n"] for r in rest)) / n,
        "male": o["male"] - sum(r["male"] for r in rest),
        "race": tuple(o["race"][i] - sum(r["race"][i] for r in rest) for i in range(7)),
    }


# order of SyntheticSpec.prevalences
PREVALENCE_ORDER = ("AutismOnly", "AdhdOnly", "Both", "None")
_PREVALENCE_CODES = np.array([AUTISM_ONLY, ADHD_ONLY, BOTH, NONE])


def cohort_prevalences() -> tuple[float, float, float, float]:
    """Published class shares in PREVALENCE_ORDER."""
    total = COHORT_COUNTS["Overall"]["n"]
    a, d, b = (COHORT_COUNTS[c]["n"] for c in ("AutismOnly", "AdhdOnly", "Both"))
    return (a / total, d / total, b / total, (total - a - d - b) / total)


@dataclass(frozen=True)
class Demographics:
    mean_age: float
    male_prob: float
    race_weights: tuple[float, ...]
    age_sd: float = 4.5


def cohort_demographics() -> dict[int, Demographics]:
    profiles = {NONE: _none_profile(), AUTISM_ONLY: COHORT_COUNTS["AutismOnly"],
                ADHD_ONLY: COHORT_COUNTS["AdhdOnly"], BOTH: COHORT_COUNTS["Both"]}
    return {
        c: Demographics(p["mean_age"], p["male"] / p["n"], tuple(r / p["n"] for r in p["race"]))
        for c, p in profiles.items()
    }


@dataclass(frozen=True)
class ItemSpec:
    """One behavioural item.  ``cutpoints`` split the latent scale into
    ``len(cutpoints) + 1`` ordinal levels (a single cutpoint for yes/no)."""

    name: str
    kind: str  # "ordinal" | "binary"
    cutpoints: tuple[float, ...]
    common: float  # shift for any autism/ADHD diagnosis
    social: float  # extra shift with autism
    attention: float  # extra shift with ADHD
    aux: float = 0.5  # shift when any other condition is present
    loading: float = 0.6
    missing_rate: float = 0.05

    def __post_init__(self):
        if self.kind not in ("ordinal", "binary"):
            raise ConfigError(f"item {self.name!r}: kind must be ordinal or binary")
        if self.kind == "binary" and len(self.cutpoints) != 1:
            raise ConfigError(f"item {self.name!r}: binary items take one cutpoint")
        if list(self.cutpoints) != sorted(self.cutpoints):
            raise ConfigError(f"item {self.name!r}: cutpoints must increase")
        if not 0 <= self.missing_rate < 1:
            raise ConfigError(f"item {self.name!r}: missing_rate must be in [0, 1)")

    @property
    def n_levels(self) -> int:
        return len(self.cutpoints) + 1


ORD4 = (0.0, 0.9, 1.8)
ORD3 = (0.6, 1.6)


def default_items() -> tuple[ItemSpec, ...]:
    s = ItemSpec
    return (
        # first feature group
        s("difficulty_concentrating", "binary", (1.2,), 1.7, 0.2, 0.9, missing_rate=0.04),
        s("difficulty_walking", "binary", (2.0,), 0.5, 0.3, 0.0, missing_rate=0.04),
        s("interest_curiosity", "ordinal", ORD4, 1.1, 0.3, 0.3, missing_rate=0.05),
        s("finishes_tasks", "ordinal", ORD4, 1.5, 0.1, 0.7, missing_rate=0.06),
        s("stays_calm", "ordinal", ORD4, 1.4, 0.3, 0.5, missing_rate=0.06),
        s("argues_too_much", "ordinal", ORD4, 1.2, 0.0, 0.6, missing_rate=0.06),
        s("difficulty_friends", "ordinal", ORD3, 1.5, 0.9, 0.1, missing_rate=0.05),
        # second feature group
        s("difficulty_coordination", "binary", (1.6,), 1.0, 0.6, 0.1, missing_rate=0.08),
        s("affectionate", "ordinal", ORD4, 0.9, 0.7, 0.0, missing_rate=0.15),
        s("bounces_back", "ordinal", ORD4, 1.2, 0.3, 0.3, missing_rate=0.15),
        s("smiles_laughs", "ordinal", ORD4, 0.8, 0.6, 0.0, missing_rate=0.15),
        s("recognize_beginning_sound", "ordinal", ORD4, 0.8, 0.4, 0.2, missing_rate=0.45),
        s("recognize_letters", "ordinal", ORD4, 0.8, 0.4, 0.2, missing_rate=0.45),
        s("explains_things", "ordinal", ORD4, 1.0, 0.6, 0.1, missing_rate=0.40),
        s("writes_first_name", "ordinal", ORD4, 0.7, 0.3, 0.2, missing_rate=0.45),
        s("easily_distracted", "ordinal", ORD4, 1.5, 0.0, 0.9, missing_rate=0.15),
        s("plays_well", "ordinal", ORD4, 1.3, 0.9, 0.0, missing_rate=0.15),
        s("shows_concern", "ordinal", ORD4, 1.0, 0.8, 0.0, missing_rate=0.15),
    )


GROUP1 = ("age", "sex", "difficulty_concentrating", "difficulty_walking", "interest_curiosity",
          "finishes_tasks", "stays_calm", "argues_too_much", "difficulty_friends")
GROUP2 = ("age", "sex", "interest_curiosity", "difficulty_friends", "difficulty_coordination", "affectionate",
          "bounces_back", "smiles_laughs", "recognize_beginning_sound", "recognize_letters", "explains_things",
          "writes_first_name", "easily_distracted", "plays_well", "shows_concern")

# P(condition | no autism/ADHD), P(condition | autism or ADHD)
DEFAULT_AUX = {
    "learning_disability": (0.04, 0.25),
    "depression": (0.02, 0.12),
    "anxiety": (0.06, 0.30),
    "behavioral_problems": (0.03, 0.30),
    "developmental_delay": (0.03, 0.25),
    "speech_disorder": (0.04, 0.20),
    "tourette": (0.002, 0.02),
    "intellectual_disability": (0.005, 0.06),
}

YES, NO = 1, 2
MISSING_CODES = (95, 99)


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator parameters; ``prevalences`` follow PREVALENCE_ORDER."""

    n_rows: int = 20000
    prevalences: tuple[float, float, float, float] = field(default_factory=cohort_prevalences)
    items: tuple[ItemSpec, ...] = field(default_factory=default_items)
    aux_prevalence: Mapping[str, tuple[float, float]] = field(default_factory=lambda: dict(DEFAULT_AUX))
    demographics: Mapping[int, Demographics] = field(default_factory=cohort_demographics)
    effect_scale: float = 1.25  # binary tasks clear 0.90 sensitivity with logistic regression
    missing_scale: float = 1.0
    label_missing_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        p = np.asarray(self.prevalences, dtype=float)
        if p.shape != (4,) or (p < 0).any() or abs(p.sum() - 1) > 1e-9:
            raise ConfigError("prevalences must be four non-negative numbers summing to 1")
        if self.n_rows < 1:
            raise ConfigError("n_rows must be positive")
        if not 0 <= self.label_missing_rate < 1:
            raise ConfigError("label_missing_rate must be in [0, 1)")
        for it in self.items:
            if not 0 <= it.missing_rate * self.missing_scale < 1:
                raise ConfigError(f"item {it.name!r}: scaled missing rate outside [0, 1)")
        unknown = set(self.aux_prevalence) - set(AUX_CONDITIONS)
        if unknown:
            raise ConfigError(f"unknown auxiliary conditions {sorted(unknown)}")

    def to_dict(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "prevalences": list(self.prevalences),
            "effect_scale": self.effect_scale,
            "missing_scale": self.missing_scale,
            "label_missing_rate": self.label_missing_rate,
            "seed": self.seed,
            "aux_prevalence": {k: list(v) for k, v in self.aux_prevalence.items()},
            "items": [{"name": it.name, "kind": it.kind, "cutpoints": list(it.cutpoints), "common": it.common,
                       "social": it.social, "attention": it.attention, "aux": it.aux, "loading": it.loading,
                       "missing_rate": it.missing_rate} for it in self.items],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SyntheticSpec":
        allowed = {"n_rows", "prevalences", "effect_scale", "missing_scale", "label_missing_rate", "seed", "items",
                   "aux_prevalence"}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"synthetic: unknown keys {sorted(unknown)}")
        kw = {k: v for k, v in d.items() if k != "items"}
        if "aux_prevalence" in kw:
            kw["aux_prevalence"] = {k: (float(v[0]), float(v[1])) for k, v in kw["aux_prevalence"].items()}
        if "prevalences" in kw:
            kw["prevalences"] = tuple(float(v) for v in kw["prevalences"])
        if "items" in d:
            names = {f.name for f in fields(ItemSpec)}
            for it in d["items"]:
                if set(it) - names:
                    raise ConfigError(f"synthetic.items: unknown keys {sorted(set(it) - names)}")
            kw["items"] = tuple(ItemSpec(**{k: (tuple(v) if k == "cutpoints" else v) for k, v in it.items()})
                                for it in d["items"])
        return cls(**kw)


def reference_codebook(items: Sequence[ItemSpec] | None = None) -> Codebook:
    """Codebook matching :func:`write_synthetic_csv` output."""
    items = tuple(items) if items is not None else default_items()
    yes_no = {YES: "Yes", NO: "No"}
    cols = [
        ColumnSpec("age", "SC_AGE", "continuous", valid_range=(0.0, 17.0), missing_codes=frozenset({99})),
        ColumnSpec("sex", "SC_SEX", "binary", valid_codes=(1, 2), positive_code=1,
                   labels={1: "Male", 2: "Female"}, missing_codes=frozenset({99})),
        ColumnSpec("race", "SC_RACE", "categorical", valid_codes=tuple(RACE_LABELS), labels=dict(RACE_LABELS),
                   missing_codes=frozenset({99}), one_hot=True),
    ]
    for cond in ("autism", "adhd") + AUX_CONDITIONS:
        cols.append(ColumnSpec(cond, f"DX_{cond.upper()}", "binary", valid_codes=(YES, NO), positive_code=YES,
                               labels=yes_no, missing_codes=frozenset(MISSING_CODES)))
    for it in items:
        if it.kind == "binary":
            cols.append(ColumnSpec(it.name, it.name.upper(), "binary", valid_codes=(YES, NO), positive_code=YES,
                                   labels=yes_no, missing_codes=frozenset(MISSING_CODES)))
        else:
            cols.append(ColumnSpec(it.name, it.name.upper(), "ordinal", valid_codes=tuple(range(1, it.n_levels + 1)),
                                   missing_codes=frozenset(MISSING_CODES)))
    item_names = {it.name for it in items}
    groups = {}
    for gname, members in (("group1", GROUP1), ("group2", GROUP2)):
        kept = tuple(m for m in members if m in item_names or m in ("age", "sex"))
        groups[gname] = FeatureGroup(gname, kept)
    targets = {c: c for c in ("autism", "adhd") + AUX_CONDITIONS}
    return Codebook(tuple(cols), {}, groups, targets, {"age": "age", "sex": "sex", "race": "race"})


def generate_synthetic(spec: SyntheticSpec = SyntheticSpec()) -> tuple[SurveyTable, CohortLabels]:
    """Draw an i.i.d. cohort; deterministic under ``spec.seed``."""
    n = spec.n_rows
    rng_class, rng_demo, rng_aux, rng_items, rng_miss = (derive_rng(spec.seed, i) for i in range(5))
    drawn = rng_class.choice(4, size=n, p=np.asarray(spec.prevalences) / np.sum(spec.prevalences))
    cls = _PREVALENCE_CODES[drawn]
    asd = (cls == AUTISM_ONLY) | (cls == BOTH)
    adhd = (cls == ADHD_ONLY) | (cls == BOTH)
    dx = asd | adhd

    age = np.empty(n)
    male = np.empty(n, dtype=bool)
    race = np.empty(n)
    for c in range(4):
        rows = np.flatnonzero(cls == c)
        d = spec.demographics[c]
        age[rows] = np.clip(np.rint(rng_demo.normal(d.mean_age, d.age_sd, len(rows))), 0, 17)
        male[rows] = rng_demo.random(len(rows)) < d.male_prob
        w = np.asarray(d.race_weights)
        race[rows] = rng_demo.choice(np.arange(1, 8), size=len(rows), p=w / w.sum())

    aux = {}
    for cond in AUX_CONDITIONS:
        p0, p1 = spec.aux_prevalence.get(cond, (0.0, 0.0))
        aux[cond] = rng_aux.random(n) < np.where(dx, p1, p0)
    any_aux = np.zeros(n, dtype=bool)
    for v in aux.values():
        any_aux |= v

    g = rng_items.normal(size=n)
    item_values = {}
    for it in spec.items:
        shift = spec.effect_scale * (it.common * dx + it.social * asd + it.attention * adhd + it.aux * any_aux)
        z = it.loading * g + shift + rng_items.normal(size=n)
        level = np.searchsorted(np.asarray(it.cutpoints), z, side="right").astype(float)
        item_values[it.name] = level if it.kind == "ordinal" else (level >= 1).astype(float)

    codebook = reference_codebook(spec.items)
    columns = codebook.names
    values = np.empty((n, len(columns)))
    mask = np.zeros((n, len(columns)), dtype=bool)
    cond_flags = {"autism": asd, "adhd": adhd, **aux}
    for j, name in enumerate(columns):
        if name == "age":
            values[:, j] = age
        elif name == "sex":
            values[:, j] = male
        elif name == "race":
            values[:, j] = race
        elif name in cond_flags:
            values[:, j] = cond_flags[name]
            if spec.label_missing_rate:
                mask[:, j] = rng_miss.random(n) < spec.label_missing_rate
        else:
            it = next(i for i in spec.items if i.name == name)
            values[:, j] = item_values[name]
            mask[:, j] = rng_miss.random(n) < it.missing_rate * spec.missing_scale
    table = SurveyTable(columns, values, mask, np.arange(n), codebook, ("<synthetic>",),
                        np.zeros(n, dtype=np.int64), np.full(n, "synthetic", dtype=object))
    labels = derive_labels(table, "autism", "adhd", {c: c for c in AUX_CONDITIONS})
    return table, labels


def write_synthetic_csv(table: SurveyTable, path: str | Path, seed: int = 0, delimiter: str = ",") -> None:
    """Write raw codes under the table's codebook.  Missing cells are written
    as a blank or as one of the column's sentinel codes (chosen at random)."""
    cb = table.codebook
    rng = derive_rng(seed, 0x5E7)
    raw = np.column_stack([cb.column(c).encode(table.values[:, j]) for j, c in enumerate(table.columns)])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow([cb.column(c).source for c in table.columns])
        for i in range(table.n_rows):
            row = []
            for j, name in enumerate(table.columns):
                if table.missing_mask[i, j]:
                    codes = sorted(cb.column(name).missing_codes)
                    pick = rng.integers(0, len(codes) + 1)
                    row.append("" if pick == len(codes) else str(codes[pick]))
                else:
                    v = raw[i, j]
                    row.append(str(int(v)) if float(v).is_integer() else repr(float(v)))
            w.writerow(row)


def class_names(codes: np.ndarray) -> list[str]:
    return [CLASS4_NAMES[int(c)] for c in codes]
