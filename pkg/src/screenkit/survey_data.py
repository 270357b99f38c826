"""Survey cohorts: codebook-driven loading, diagnostic labels, row/column
filters, stratified splits and demographic summaries.

Values are stored as float64 with NaN in missing cells; ``missing_mask`` is
the authoritative missingness indicator.  Ordinal items are recoded to
``0..L-1`` in codebook order, binary items to ``{0, 1}`` (1 = the declared
positive code), categorical and continuous items keep their raw value.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd
import yaml

from .errors import ConfigError, DataError, EmptyCohortError
from .rng import derive_rng

logger = logging.getLogger(__name__)

KINDS = ("ordinal", "categorical", "continuous", "binary")
POLICIES = ("complete_case", "keep_missing")

CLASS4_NAMES = ("None", "AutismOnly", "AdhdOnly", "Both")
NONE, AUTISM_ONLY, ADHD_ONLY, BOTH = range(4)

AUX_CONDITIONS = (
    "learning_disability",
    "depression",
    "anxiety",
    "behavioral_problems",
    "developmental_delay",
    "speech_disorder",
    "tourette",
    "intellectual_disability",
)
ALL_CONDITIONS = ("autism", "adhd") + AUX_CONDITIONS
# conditions whose answer must be present for a row to be kept
REQUIRED_TARGETS = (
    "tourette",
    "autism",
    "adhd",
    "anxiety",
    "depression",
    "speech_disorder",
    "learning_disability",
    "developmental_delay",
)

MAX_DIAGNOSTICS = 100


# --------------------------------------------------------------- codebook


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    source: str
    kind: str
    valid_codes: tuple[int, ...] | None = None
    valid_range: tuple[float, float] | None = None
    missing_codes: frozenset[int] = frozenset()
    positive_code: int | None = None
    labels: Mapping[int, str] = field(default_factory=dict)
    one_hot: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.kind in ("ordinal", "categorical", "binary") and not self.valid_codes:
            raise ConfigError(f"column {self.name!r}: {self.kind} column needs valid_codes")
        if self.valid_codes is not None and len(set(self.valid_codes)) != len(self.valid_codes):
            raise ConfigError(f"column {self.name!r}: duplicate valid_codes")
        if self.kind == "binary":
            if len(self.valid_codes) != 2:
                raise ConfigError(f"column {self.name!r}: binary column needs exactly two codes")
            if self.positive_code not in self.valid_codes:
                raise ConfigError(f"column {self.name!r}: positive_code must be one of valid_codes")
        if self.kind == "continuous" and self.valid_codes is None and self.valid_range is None:
            raise ConfigError(f"column {self.name!r}: continuous column needs valid_range or valid_codes")
        if self.valid_range is not None and self.valid_range[0] > self.valid_range[1]:
            raise ConfigError(f"column {self.name!r}: empty valid_range")
        if self.one_hot and self.kind != "categorical":
            raise ConfigError(f"column {self.name!r}: one_hot applies to categorical columns only")
        clash = {c for c in self.missing_codes if self._raw_valid(c)}
        if clash:
            raise ConfigError(f"column {self.name!r}: missing codes {sorted(clash)} overlap the valid domain")

    def _raw_valid(self, code: float) -> bool:
        if self.valid_codes is not None:
            return code in self.valid_codes
        lo, hi = self.valid_range
        return lo <= code <= hi

    def decode(self, raw: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Raw numeric cells (NaN = blank) -> (values, missing, out_of_domain)."""
        raw = np.asarray(raw, dtype=float)
        blank = np.isnan(raw)
        sentinel = np.isin(raw, list(self.missing_codes)) if self.missing_codes else np.zeros_like(blank)
        if self.valid_codes is not None:
            valid = np.isin(raw, self.valid_codes)
        else:
            lo, hi = self.valid_range
            valid = (raw >= lo) & (raw <= hi)
        bad = ~blank & ~sentinel & ~valid
        missing = ~valid
        values = np.full(raw.shape, np.nan)
        if self.kind == "ordinal":
            for level, code in enumerate(self.valid_codes):
                values[raw == code] = level
        elif self.kind == "binary":
            values[valid] = (raw[valid] == self.positive_code).astype(float)
        else:
            values[valid] = raw[valid]
        return values, missing, bad

    def encode(self, values: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`decode` for valid cells; NaN stays NaN."""
        values = np.asarray(values, dtype=float)
        out = np.full(values.shape, np.nan)
        ok = ~np.isnan(values)
        if self.kind == "ordinal":
            codes = np.asarray(self.valid_codes, dtype=float)
            out[ok] = codes[values[ok].astype(int)]
        elif self.kind == "binary":
            other = next(c for c in self.valid_codes if c != self.positive_code)
            out[ok] = np.where(values[ok] == 1.0, self.positive_code, other)
        else:
            out[ok] = values[ok]
        return out

    def value_label(self, value: float) -> str:
        if np.isnan(value):
            return "Missing"
        if self.kind == "ordinal":
            code = self.valid_codes[int(value)]
        elif self.kind == "binary":
            code = self.positive_code if value == 1.0 else next(c for c in self.valid_codes if c != self.positive_code)
        else:
            code = int(value) if float(value).is_integer() else value
        return self.labels.get(code, str(code))

    def to_dict(self) -> dict:
        d = {"name": self.name, "source": self.source, "kind": self.kind}
        if self.valid_codes is not None:
            d["valid_codes"] = list(self.valid_codes)
        if self.valid_range is not None:
            d["valid_range"] = list(self.valid_range)
        if self.missing_codes:
            d["missing_codes"] = sorted(self.missing_codes)
        if self.positive_code is not None:
            d["positive_code"] = self.positive_code
        if self.labels:
            d["labels"] = dict(self.labels)
        if self.one_hot:
            d["one_hot"] = True
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "ColumnSpec":
        unknown = set(d) - {"name", "source", "kind", "valid_codes", "valid_range", "missing_codes",
                            "positive_code", "labels", "one_hot"}
        if unknown:
            raise ConfigError(f"column {d.get('name')!r}: unknown keys {sorted(unknown)}")
        try:
            return cls(
                name=str(d["name"]),
                source=str(d.get("source", d["name"])),
                kind=str(d["kind"]),
                valid_codes=tuple(int(c) for c in d["valid_codes"]) if d.get("valid_codes") is not None else None,
                valid_range=tuple(float(v) for v in d["valid_range"]) if d.get("valid_range") is not None else None,
                missing_codes=frozenset(int(c) for c in d.get("missing_codes", ())),
                positive_code=int(d["positive_code"]) if d.get("positive_code") is not None else None,
                labels={int(k): str(v) for k, v in (d.get("labels") or {}).items()},
                one_hot=bool(d.get("one_hot", False)),
            )
        except KeyError as exc:  # pragma: no cover - message only
            raise ConfigError(f"column entry missing key {exc}") from None


@dataclass(frozen=True)
class FeatureGroup:
    name: str
    members: tuple[str, ...]

    def __post_init__(self):
        if not self.members:
            raise ConfigError(f"feature group {self.name!r} is empty")
        if len(set(self.members)) != len(self.members):
            raise ConfigError(f"feature group {self.name!r} has duplicate members")

    @staticmethod
    def union(name: str, groups: Iterable["FeatureGroup"]) -> "FeatureGroup":
        seen: list[str] = []
        for g in groups:
            seen.extend(m for m in g.members if m not in seen)
        return FeatureGroup(name, tuple(seen))


@dataclass(frozen=True)
class Codebook:
    """Logical-name -> source-column mapping plus value domains.

    ``targets`` maps each condition name (``autism``, ``adhd`` and the
    auxiliary conditions) to a logical binary column; ``demographics`` maps
    ``age``/``sex``/``race`` to logical columns.
    """

    columns: tuple[ColumnSpec, ...]
    year_aliases: Mapping[str, Mapping[str, str]] = field(default_factory=dict)
    feature_groups: Mapping[str, FeatureGroup] = field(default_factory=dict)
    targets: Mapping[str, str] = field(default_factory=dict)
    demographics: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        names = [c.name for c in self.columns]
        dup = sorted({n for n in names if names.count(n) > 1})
        if dup:
            raise ConfigError(f"duplicate logical column names: {dup}")
        known = set(names)
        for g in self.feature_groups.values():
            missing = [m for m in g.members if m not in known]
            if missing:
                raise ConfigError(f"feature group {g.name!r} references unknown columns {missing}")
        for role, col in list(self.targets.items()) + list(self.demographics.items()):
            if col not in known:
                raise ConfigError(f"{role!r} references unknown column {col!r}")
        for cond, col in self.targets.items():
            if self.column(col).kind != "binary":
                raise ConfigError(f"target {cond!r} column {col!r} must be binary (yes/no)")
        for year, aliases in self.year_aliases.items():
            bad = [n for n in aliases if n not in known]
            if bad:
                raise ConfigError(f"year {year}: aliases for unknown columns {bad}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def column(self, name: str) -> ColumnSpec:
        for c in self.columns:
            if c.name == name:
                return c
        raise ConfigError(f"unknown column {name!r}")

    def source_for(self, name: str, year: str | int | None) -> str:
        aliases = self.year_aliases.get(str(year), {}) if year is not None else {}
        return aliases.get(name, self.column(name).source)

    def group(self, name: str) -> FeatureGroup:
        if name == "combined" and "combined" not in self.feature_groups:
            return FeatureGroup.union("combined", self.feature_groups.values())
        try:
            return self.feature_groups[name]
        except KeyError:
            raise ConfigError(f"unknown feature group {name!r}") from None

    def to_dict(self) -> dict:
        return {
            "columns": [c.to_dict() for c in self.columns],
            "year_aliases": {str(y): dict(a) for y, a in self.year_aliases.items()},
            "feature_groups": {n: list(g.members) for n, g in self.feature_groups.items()},
            "targets": dict(self.targets),
            "demographics": dict(self.demographics),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Codebook":
        unknown = set(d) - {"columns", "year_aliases", "feature_groups", "targets", "demographics"}
        if unknown:
            raise ConfigError(f"codebook: unknown sections {sorted(unknown)}")
        return cls(
            columns=tuple(ColumnSpec.from_dict(c) for c in d.get("columns", ())),
            year_aliases={str(y): {str(k): str(v) for k, v in a.items()} for y, a in (d.get("year_aliases") or {}).items()},
            feature_groups={str(n): FeatureGroup(str(n), tuple(m)) for n, m in (d.get("feature_groups") or {}).items()},
            targets={str(k): str(v) for k, v in (d.get("targets") or {}).items()},
            demographics={str(k): str(v) for k, v in (d.get("demographics") or {}).items()},
        )


def load_codebook(path: str | Path) -> Codebook:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read codebook {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"codebook {path} is not a mapping")
    holes = sorted(set(_placeholders(raw)))
    if holes:
        raise ConfigError(f"codebook {path} has unfilled {PLACEHOLDER} entries under: {', '.join(holes[:5])}")
    return Codebook.from_dict(raw)


PLACEHOLDER = "FILL_ME"


def _placeholders(obj, where: str = "") -> Iterable[str]:
    if isinstance(obj, str) and PLACEHOLDER in obj:
        yield where or "<root>"
    elif isinstance(obj, Mapping):
        for k, v in obj.items():
            label = v.get("name", k) if isinstance(v, Mapping) else k
            yield from _placeholders(v, f"{where}.{label}" if where else str(label))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            label = v.get("name", i) if isinstance(v, Mapping) else i
            yield from _placeholders(v, f"{where}.{label}" if where else str(label))


def dump_codebook(codebook: Codebook, path: str | Path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(codebook.to_dict(), fh, sort_keys=False)


# ------------------------------------------------------------------ table


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LoadReport:
    files: tuple[str, ...]
    n_rows: int
    dropped_rows: int
    coerced_cells: Mapping[str, int]
    missing_rate: Mapping[str, float]
    diagnostics: tuple[dict, ...] = ()

    def to_dict(self) -> dict:
        return {
            "files": list(self.files),
            "n_rows": self.n_rows,
            "dropped_rows": self.dropped_rows,
            "coerced_cells": dict(self.coerced_cells),
            "coerced_total": int(sum(self.coerced_cells.values())),
            "missing_rate": dict(self.missing_rate),
            "diagnostics": list(self.diagnostics),
        }


@dataclass(frozen=True, eq=False)
class SurveyTable:
    """Immutable cohort matrix.

    ``row_ids`` are positions in the table as originally loaded and survive
    every row filter, so labels and splits can be realigned after projection.
    """

    columns: tuple[str, ...]
    values: np.ndarray
    missing_mask: np.ndarray
    row_ids: np.ndarray
    codebook: Codebook | None = None
    source_files: tuple[str, ...] = ()
    row_source: np.ndarray | None = None
    row_year: np.ndarray | None = None
    load_report: LoadReport | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        mask = np.asarray(self.missing_mask, dtype=bool)
        if values.ndim != 2 or values.shape != mask.shape or values.shape[1] != len(self.columns):
            raise ValueError("values/missing_mask/columns shapes disagree")
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("duplicate column names")
        values = np.where(mask, np.nan, values)
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "missing_mask", _readonly(mask))
        object.__setattr__(self, "row_ids", _readonly(np.asarray(self.row_ids, dtype=np.int64)))
        n = values.shape[0]
        if self.row_source is None:
            object.__setattr__(self, "row_source", np.zeros(n, dtype=np.int64))
        if self.row_year is None:
            object.__setattr__(self, "row_year", np.full(n, "", dtype=object))
        object.__setattr__(self, "row_source", _readonly(self.row_source))
        object.__setattr__(self, "row_year", _readonly(self.row_year))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise ConfigError(f"column {name!r} not in table") from None

    def col(self, name: str) -> np.ndarray:
        return self.values[:, self.index(name)]

    def spec(self, name: str) -> ColumnSpec | None:
        return self.codebook.column(name) if self.codebook is not None else None

    def take(self, rows: np.ndarray) -> "SurveyTable":
        rows = np.asarray(rows)
        if rows.dtype == bool:
            rows = np.flatnonzero(rows)
        return SurveyTable(
            self.columns, self.values[rows], self.missing_mask[rows], self.row_ids[rows],
            self.codebook, self.source_files, self.row_source[rows], self.row_year[rows], self.load_report,
        )

    def project(self, names: Sequence[str]) -> "SurveyTable":
        idx = [self.index(n) for n in names]
        return SurveyTable(
            tuple(names), self.values[:, idx], self.missing_mask[:, idx], self.row_ids,
            self.codebook, self.source_files, self.row_source, self.row_year, self.load_report,
        )

    def with_values(self, values: np.ndarray, missing_mask: np.ndarray | None = None) -> "SurveyTable":
        if missing_mask is None:
            missing_mask = np.isnan(values)
        return SurveyTable(
            self.columns, values, missing_mask, self.row_ids,
            self.codebook, self.source_files, self.row_source, self.row_year, self.load_report,
        )

    def positions(self, row_ids: np.ndarray) -> np.ndarray:
        """Local positions of the given original row ids (all must be present)."""
        order = np.argsort(self.row_ids, kind="stable")
        found = np.searchsorted(self.row_ids, row_ids, sorter=order)
        found = np.clip(found, 0, max(self.n_rows - 1, 0))
        pos = order[found] if self.n_rows else np.zeros(0, dtype=np.int64)
        if len(pos) and not np.array_equal(self.row_ids[pos], row_ids):
            raise ValueError("row ids not present in table")
        return pos

    def to_frame(self, raw_codes: bool = False) -> pd.DataFrame:
        data = {}
        for j, name in enumerate(self.columns):
            v = self.values[:, j]
            spec = self.spec(name)
            data[name] = spec.encode(v) if raw_codes and spec is not None else v
        return pd.DataFrame(data)


def load_table(
    source: str | Path,
    codebook: Codebook,
    year: str | int | None = None,
    columns: Sequence[str] | None = None,
    delimiter: str = ",",
) -> SurveyTable:
    """Read one delimited file under ``codebook`` for survey ``year``."""
    names = tuple(columns) if columns is not None else codebook.names
    try:
        header = pd.read_csv(source, sep=delimiter, nrows=0).columns
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot read {source}: {exc}") from None
    wanted = {}
    for name in names:
        src = codebook.source_for(name, year)
        if src not in header:
            raise ConfigError(f"column {name!r} (source {src!r}) not found in {source} for year {year}")
        wanted[name] = src
    try:
        frame = pd.read_csv(source, sep=delimiter, usecols=sorted(set(wanted.values())), dtype=str,
                            keep_default_na=False)
    except (pd.errors.ParserError, ValueError) as exc:
        raise DataError(f"malformed table {source}: {exc}") from None

    n = len(frame)
    values = np.empty((n, len(names)))
    mask = np.empty((n, len(names)), dtype=bool)
    coerced: dict[str, int] = {}
    diagnostics: list[dict] = []
    for j, name in enumerate(names):
        text = frame[wanted[name]].str.strip()
        raw = pd.to_numeric(text.where(text != ""), errors="coerce").to_numpy(dtype=float)
        unparsable = (text != "").to_numpy() & np.isnan(raw)
        vals, miss, bad = codebook.column(name).decode(raw)
        bad = bad | unparsable
        values[:, j] = vals
        mask[:, j] = miss
        coerced[name] = int(bad.sum())
        for r in np.flatnonzero(bad)[: max(0, MAX_DIAGNOSTICS - len(diagnostics))]:
            diagnostics.append({"file": str(source), "row": int(r), "column": name, "value": str(frame.iat[r, frame.columns.get_loc(wanted[name])])})
    total_bad = sum(coerced.values())
    if total_bad:
        logger.warning("%s: %d out-of-domain cells treated as missing", source, total_bad)
    report = LoadReport(
        files=(str(source),),
        n_rows=n,
        dropped_rows=0,
        coerced_cells=coerced,
        missing_rate={name: float(mask[:, j].mean()) if n else 0.0 for j, name in enumerate(names)},
        diagnostics=tuple(diagnostics),
    )
    return SurveyTable(
        names, values, mask, np.arange(n), codebook, (str(source),),
        np.zeros(n, dtype=np.int64), np.full(n, "" if year is None else str(year), dtype=object), report,
    )


def load_tables(
    sources: Sequence[tuple[str | Path, str | int | None]],
    codebook: Codebook,
    columns: Sequence[str] | None = None,
    delimiter: str = ",",
) -> SurveyTable:
    """Load several (file, year) pairs and stack them under logical names."""
    if not sources:
        raise ConfigError("no input files given")
    parts = [load_table(path, codebook, year, columns, delimiter) for path, year in sources]
    names = parts[0].columns
    values = np.vstack([p.values for p in parts])
    mask = np.vstack([p.missing_mask for p in parts])
    n = values.shape[0]
    row_source = np.concatenate([np.full(p.n_rows, i, dtype=np.int64) for i, p in enumerate(parts)])
    row_year = np.concatenate([p.row_year for p in parts])
    coerced = {name: sum(p.load_report.coerced_cells[name] for p in parts) for name in names}
    diagnostics = tuple(d for p in parts for d in p.load_report.diagnostics)[:MAX_DIAGNOSTICS]
    files = tuple(str(path) for path, _ in sources)
    report = LoadReport(
        files=files, n_rows=n, dropped_rows=0, coerced_cells=coerced,
        missing_rate={name: float(mask[:, j].mean()) if n else 0.0 for j, name in enumerate(names)},
        diagnostics=diagnostics,
    )
    return SurveyTable(names, values, mask, np.arange(n), codebook, files, row_source, row_year, report)


# ----------------------------------------------------------------- labels


@dataclass(frozen=True, eq=False)
class CohortLabels:
    row_ids: np.ndarray
    asd_flag: np.ndarray
    adhd_flag: np.ndarray
    aux: Mapping[str, np.ndarray]
    missing: Mapping[str, np.ndarray]

    @property
    def class4(self) -> np.ndarray:
        return class4_from_flags(self.asd_flag, self.adhd_flag)

    @property
    def n_rows(self) -> int:
        return len(self.row_ids)

    def flag(self, condition: str) -> np.ndarray:
        if condition == "autism":
            return self.asd_flag
        if condition == "adhd":
            return self.adhd_flag
        return self.aux[condition]

    @property
    def conditions(self) -> tuple[str, ...]:
        return ("autism", "adhd") + tuple(self.aux)

    def any_condition(self) -> np.ndarray:
        out = self.asd_flag | self.adhd_flag
        for v in self.aux.values():
            out = out | v
        return out

    def take(self, rows: np.ndarray) -> "CohortLabels":
        rows = np.asarray(rows)
        return CohortLabels(
            self.row_ids[rows], self.asd_flag[rows], self.adhd_flag[rows],
            {k: v[rows] for k, v in self.aux.items()},
            {k: v[rows] for k, v in self.missing.items()},
        )

    def align(self, row_ids: np.ndarray) -> "CohortLabels":
        order = np.argsort(self.row_ids, kind="stable")
        pos = order[np.searchsorted(self.row_ids, row_ids, sorter=order)]
        if not np.array_equal(self.row_ids[pos], row_ids):
            raise ValueError("labels do not cover the requested rows")
        return self.take(pos)


def class4_from_flags(asd: np.ndarray, adhd: np.ndarray) -> np.ndarray:
    """(F,F)->None, (T,F)->AutismOnly, (F,T)->AdhdOnly, (T,T)->Both."""
    return np.asarray(asd, dtype=np.int8) + 2 * np.asarray(adhd, dtype=np.int8)


def derive_labels(
    table: SurveyTable,
    asd_item: str,
    adhd_item: str,
    aux_items: Mapping[str, str] | None = None,
) -> CohortLabels:
    """Yes/no answers -> condition flags.  Missing answers give flag False
    and are recorded in ``missing`` for :func:`filter_complete_targets`."""
    aux_items = dict(aux_items or {})
    items = {"autism": asd_item, "adhd": adhd_item, **aux_items}
    flags, missing = {}, {}
    for cond, item in items.items():
        spec = table.spec(item)
        if spec is not None and spec.kind != "binary":
            raise ConfigError(f"label item {item!r} must be a binary yes/no column")
        v = table.col(item)
        miss = table.missing_mask[:, table.index(item)]
        flags[cond] = (v == 1.0) & ~miss
        missing[cond] = miss.copy()
    return CohortLabels(
        table.row_ids.copy(), flags["autism"], flags["adhd"],
        {c: flags[c] for c in aux_items}, missing,
    )


def derive_labels_from_codebook(table: SurveyTable) -> CohortLabels:
    cb = table.codebook
    if cb is None or "autism" not in cb.targets or "adhd" not in cb.targets:
        raise ConfigError("codebook must declare autism and adhd targets")
    aux = {c: col for c, col in cb.targets.items() if c not in ("autism", "adhd")}
    return derive_labels(table, cb.targets["autism"], cb.targets["adhd"], aux)


def filter_complete_targets(
    table: SurveyTable,
    labels: CohortLabels,
    required: Sequence[str] = REQUIRED_TARGETS,
) -> tuple[SurveyTable, CohortLabels]:
    """Drop rows missing an answer for any required condition."""
    if not np.array_equal(table.row_ids, labels.row_ids):
        labels = labels.align(table.row_ids)
    absent = [c for c in required if c not in labels.missing]
    if absent:
        raise ConfigError(f"labels were not derived for required conditions {absent}")
    keep = np.ones(table.n_rows, dtype=bool)
    for c in required:
        keep &= ~labels.missing[c]
    if not keep.any():
        raise EmptyCohortError("no rows have complete target labels")
    rows = np.flatnonzero(keep)
    return table.take(rows), labels.take(rows)


def select_features(table: SurveyTable, group: FeatureGroup, policy: str = "keep_missing") -> SurveyTable:
    if policy not in POLICIES:
        raise ConfigError(f"unknown missing-data policy {policy!r}")
    unknown = [m for m in group.members if m not in table.columns]
    if unknown:
        raise ConfigError(f"feature group {group.name!r}: unknown members {unknown}")
    out = table.project(group.members)
    if policy == "complete_case":
        keep = ~out.missing_mask.any(axis=1)
        if not keep.any():
            raise EmptyCohortError(f"no complete cases for feature group {group.name!r}")
        out = out.take(np.flatnonzero(keep))
    return out


# ------------------------------------------------------------------ split


@dataclass(frozen=True, eq=False)
class SplitAssignment:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    seed: int
    strata: tuple
    sizes: Mapping = field(default_factory=dict)

    def restrict(self, keep: np.ndarray) -> "SplitAssignment":
        """Split over the rows where ``keep`` is true, renumbered 0..m-1."""
        keep = np.asarray(keep, dtype=bool)
        new_index = np.cumsum(keep) - 1
        part = lambda idx: new_index[idx[keep[idx]]]
        return SplitAssignment(part(self.train), part(self.val), part(self.test), self.seed, self.strata, self.sizes)


def _apportion(m: int, ratios: Sequence[float]) -> list[int]:
    exact = np.asarray(ratios, dtype=float) / np.sum(ratios) * m
    sizes = np.floor(exact).astype(int)
    left = m - sizes.sum()
    # largest remainder; earlier parts win ties
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - sizes[i]), i))
    for i in order[:left]:
        sizes[i] += 1
    return sizes.tolist()


def split_dataset(
    n_rows: int,
    strata: np.ndarray | None,
    seed: int,
    ratios: Sequence[float] = (8, 1, 1),
    min_stratum: int = 3,
) -> SplitAssignment:
    """Stratified train/val/test split, exact within one row per stratum."""
    if n_rows < 10:
        raise DataError(f"need at least 10 rows to split, got {n_rows}")
    strata = np.zeros(n_rows, dtype=np.int64) if strata is None else np.asarray(strata)
    if len(strata) != n_rows:
        raise ValueError("strata length differs from n_rows")
    parts: list[list[np.ndarray]] = [[], [], []]
    sizes = {}
    levels = np.unique(strata)
    for s_index, level in enumerate(levels):
        members = np.flatnonzero(strata == level)
        rng = derive_rng(seed, s_index)
        members = members[rng.permutation(len(members))]
        if len(members) < min_stratum:
            warnings.warn(f"stratum {level!r} has {len(members)} rows; assigned to train", stacklevel=2)
            counts = [len(members), 0, 0]
        else:
            counts = _apportion(len(members), ratios)
        start = 0
        for p, c in enumerate(counts):
            parts[p].append(members[start:start + c])
            start += c
        sizes[level.item() if hasattr(level, "item") else level] = tuple(counts)
    train, val, test = (np.sort(np.concatenate(p)) if p else np.zeros(0, dtype=np.int64) for p in parts)
    return SplitAssignment(train, val, test, int(seed), tuple(x.item() if hasattr(x, "item") else x for x in levels), sizes)


# ---------------------------------------------------------------- summary


SUMMARY_CLASSES = ("Overall", "AutismOnly", "AdhdOnly", "Both")


@dataclass(frozen=True)
class ClassSummary:
    n: int
    mean_age: float
    sex: Mapping[str, tuple[int, float]]
    race: Mapping[str, tuple[int, float]]


@dataclass(frozen=True)
class CohortSummary:
    classes: Mapping[str, ClassSummary]

    def to_dict(self) -> dict:
        return {
            name: {
                "n": s.n,
                "mean_age": s.mean_age,
                "sex": {k: {"count": c, "percent": p} for k, (c, p) in s.sex.items()},
                "race": {k: {"count": c, "percent": p} for k, (c, p) in s.race.items()},
            }
            for name, s in self.classes.items()
        }

    def to_rows(self) -> list[list[str]]:
        """Table with one row per variable and one column per class."""
        header = ["Variable", *self.classes]
        rows = [header, ["N", *(str(s.n) for s in self.classes.values())]]
        rows.append(["Mean age (years)", *(f"{s.mean_age:.2f}" for s in self.classes.values())])
        for part in ("sex", "race"):
            cats: list[str] = []
            for s in self.classes.values():
                cats.extend(c for c in getattr(s, part) if c not in cats)
            for cat in cats:
                cells = []
                for s in self.classes.values():
                    c, p = getattr(s, part).get(cat, (0, 0.0))
                    cells.append(f"{c} ({p:.2f}%)")
                rows.append([cat, *cells])
        return rows


def _breakdown(table: SurveyTable, name: str, rows: np.ndarray) -> dict[str, tuple[int, float]]:
    spec = table.spec(name)
    values = table.col(name)[rows]
    labels = [spec.value_label(v) if spec is not None else ("Missing" if np.isnan(v) else str(v)) for v in values]
    cats, counts = np.unique(np.asarray(labels, dtype=object).astype(str), return_counts=True) if labels else ([], [])
    total = len(rows)
    out = {str(c): (int(k), round(100.0 * k / total, 2)) for c, k in zip(cats, counts)}
    return dict(sorted(out.items(), key=lambda kv: -kv[1][0]))


def summarize_cohort(
    table: SurveyTable,
    labels: CohortLabels,
    age: str = "age",
    sex: str = "sex",
    race: str = "race",
) -> CohortSummary:
    if not np.array_equal(table.row_ids, labels.row_ids):
        labels = labels.align(table.row_ids)
    for name in (age, sex, race):
        table.index(name)
    cls = labels.class4
    selections = {
        "Overall": np.arange(table.n_rows),
        "AutismOnly": np.flatnonzero(cls == AUTISM_ONLY),
        "AdhdOnly": np.flatnonzero(cls == ADHD_ONLY),
        "Both": np.flatnonzero(cls == BOTH),
    }
    out = {}
    ages = table.col(age)
    for name, rows in selections.items():
        a = ages[rows]
        a = a[~np.isnan(a)]
        out[name] = ClassSummary(
            n=len(rows),
            mean_age=float(a.mean()) if len(a) else float("nan"),
            sex=_breakdown(table, sex, rows) if len(rows) else {},
            race=_breakdown(table, race, rows) if len(rows) else {},
        )
    return CohortSummary(out)
