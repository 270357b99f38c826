"""Config-driven screening workflow.

``run_workflow`` goes load -> labels -> target filter -> stratified split ->
per feature set evaluation -> forward selection on the combined set ->
retrain on the selected subset -> inspection.  The feature groups are
evaluated on complete cases; the combined set is kNN-imputed with donors
from the training partition.

Seeds: the split uses the root seed directly, each cell uses
``cell_seed(root, task, learner)`` and the selection for task ``t`` uses
``derive_seed(root, SFS_KEY, t)``.  Nothing depends on scheduling, so the
report is byte-identical for any thread count.
"""

from __future__ import annotations

import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import yaml

from . import __version__
from .errors import ConfigError, DataError, ScreenkitError
from .evaluation import auc_metric, coefficient_importance, partial_dependence, permutation_importance
from .feature_selection import retrain_on_subset, sfs_forward
from .imputation import ImputeConfig, ImputeReport, impute_knn
from .learners import LEARNERS, TrainConfig, fit_binary, train_multilabel
from .learners.forest import ForestConfig
from .learners.logistic import LinearModel, LogisticConfig
from .learners.multilabel import MultilabelModel
from .learners.tree import TreeConfig
from .report import EvaluationReport
from .rng import derive_seed
from .survey_data import (
    REQUIRED_TARGETS, CohortLabels, LoadReport, SplitAssignment, SurveyTable,
    derive_labels_from_codebook, filter_complete_targets, load_codebook, load_tables, select_features,
    split_dataset, summarize_cohort,
)
from .synthetic import SyntheticSpec, generate_synthetic
from .tasks import TASKS, Cell, PreparedData, config_hash, evaluate_cell, task_labels

FEATURE_SETS = ("group1", "group2", "combined")
SFS_KEY = 7
INSPECT_KEY = 8
DEFAULT_SEED = 0
# where and how wide a run executes; recorded in run_meta.json, not the report
RUN_LOCAL_KEYS = ("output_dir", "threads")


def _reject_unknown(section: str, d: Mapping, allowed) -> None:
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"{section}: unknown keys {sorted(unknown)}")


def _section(d: Mapping, key: str) -> Mapping:
    v = d.get(key) or {}
    if not isinstance(v, Mapping):
        raise ConfigError(f"{key}: expected a mapping")
    return v


@dataclass(frozen=True)
class DataConfig:
    source: str = "synthetic"  # "synthetic" | "files"
    files: tuple[tuple[str, str | None], ...] = ()  # (path, survey year)
    codebook: str | None = None
    delimiter: str = ","
    required_targets: tuple[str, ...] = REQUIRED_TARGETS
    synthetic: SyntheticSpec = field(default_factory=SyntheticSpec)

    def __post_init__(self):
        if self.source not in ("synthetic", "files"):
            raise ConfigError(f"data.source must be synthetic or files, got {self.source!r}")
        if self.source == "files" and (not self.files or not self.codebook):
            raise ConfigError("data.source=files needs data.files and data.codebook")

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "files": [{"path": p, "year": y} for p, y in self.files],
            "codebook": self.codebook,
            "delimiter": self.delimiter,
            "required_targets": list(self.required_targets),
            "synthetic": self.synthetic.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "DataConfig":
        _reject_unknown("data", d, {f.name for f in fields(cls)})
        kw = dict(d)
        if "files" in kw:
            files = []
            for entry in kw["files"] or ():
                if isinstance(entry, str):
                    files.append((entry, None))
                else:
                    _reject_unknown("data.files", entry, {"path", "year"})
                    year = entry.get("year")
                    files.append((str(entry["path"]), None if year is None else str(year)))
            kw["files"] = tuple(files)
        if "required_targets" in kw:
            kw["required_targets"] = tuple(kw["required_targets"])
        if "synthetic" in kw:
            kw["synthetic"] = SyntheticSpec.from_dict(kw["synthetic"] or {})
        return cls(**kw)


@dataclass(frozen=True)
class SplitConfig:
    ratios: tuple[float, float, float] = (8, 1, 1)
    min_stratum: int = 3

    def __post_init__(self):
        if len(self.ratios) != 3 or min(self.ratios) < 0 or sum(self.ratios) <= 0:
            raise ConfigError("split.ratios must be three non-negative numbers")


@dataclass(frozen=True)
class ImputeStage:
    k: int = 5
    weighting: str = "uniform"
    distance_scale: str = "observed_fraction_rescaled"
    donors: str = "train"  # "train" | "all"
    combined_policy: str = "impute"  # "impute" | "complete_case"

    def __post_init__(self):
        if self.donors not in ("train", "all"):
            raise ConfigError("impute.donors must be train or all")
        if self.combined_policy not in ("impute", "complete_case"):
            raise ConfigError("impute.combined_policy must be impute or complete_case")
        self.knn()

    def knn(self) -> ImputeConfig:
        return ImputeConfig(self.k, self.weighting, self.distance_scale)


@dataclass(frozen=True)
class SfsConfig:
    enabled: bool = True
    k: int = 12
    feature_set: str = "combined"
    learner: str = "forest"
    n_trees: int = 25  # forest size during the search only
    scorer: str = "roc_auc"
    cv_folds: int | None = None
    retrain_learners: tuple[str, ...] | None = None  # None -> the configured learners

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("sfs.k must be >= 1")
        if self.learner not in LEARNERS:
            raise ConfigError(f"sfs.learner: unknown learner {self.learner!r}")
        if self.scorer != "roc_auc":
            raise ConfigError(f"sfs.scorer: unsupported scorer {self.scorer!r}")
        if self.feature_set not in FEATURE_SETS:
            raise ConfigError(f"sfs.feature_set: unknown feature set {self.feature_set!r}")


@dataclass(frozen=True)
class InspectConfig:
    enabled: bool = True
    learners: tuple[str, ...] = ("logistic", "forest")
    n_repeats: int = 5
    pd_features: int = 3
    pd_grid_max: int = 20


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = DEFAULT_SEED
    output_dir: str = "results"
    threads: int = 1
    tasks: tuple[str, ...] = TASKS
    feature_sets: tuple[str, ...] = FEATURE_SETS
    learners: tuple[str, ...] = LEARNERS
    data: DataConfig = field(default_factory=DataConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    impute: ImputeStage = field(default_factory=ImputeStage)
    train: TrainConfig = field(default_factory=TrainConfig)
    sfs: SfsConfig = field(default_factory=SfsConfig)
    inspection: InspectConfig = field(default_factory=InspectConfig)
    summary: bool = True

    def __post_init__(self):
        if not self.tasks:
            raise ConfigError("at least one task is required")
        if not self.feature_sets:
            raise ConfigError("at least one feature set is required")
        for name, given, known in (("task", self.tasks, TASKS), ("feature set", self.feature_sets, FEATURE_SETS),
                                   ("learner", self.learners, LEARNERS)):
            bad = [g for g in given if g not in known]
            if bad:
                raise ConfigError(f"unknown {name} {bad[0]!r} (known: {', '.join(known)})")
            if len(set(given)) != len(given):
                raise ConfigError(f"duplicate {name} entries")
        if not self.learners:
            raise ConfigError("at least one learner is required")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def to_dict(self) -> dict:
        train = self.train
        return {
            "seed": self.seed,
            "output_dir": self.output_dir,
            "threads": self.threads,
            "tasks": list(self.tasks),
            "feature_sets": list(self.feature_sets),
            "learners": list(self.learners),
            "data": self.data.to_dict(),
            "split": {"ratios": list(self.split.ratios), "min_stratum": self.split.min_stratum},
            "impute": asdict(self.impute),
            "train": {
                "logistic": asdict(train.logistic),
                "tree": asdict(train.tree),
                # forest seeds come from the root seed, per cell
                "forest": {"n_trees": train.forest.n_trees, "mtry": train.forest.mtry,
                           "bootstrap": train.forest.bootstrap, "tree": asdict(train.forest.tree)},
            },
            "sfs": {**asdict(self.sfs), "retrain_learners": None if self.sfs.retrain_learners is None
                    else list(self.sfs.retrain_learners)},
            "inspection": {**asdict(self.inspection), "learners": list(self.inspection.learners)},
            "summary": self.summary,
        }

    @classmethod
    def from_dict(cls, d: Mapping | None) -> "ExperimentConfig":
        d = dict(d or {})
        _reject_unknown("config", d, {f.name for f in fields(cls)})
        kw: dict[str, Any] = {}
        for key in ("seed", "threads"):
            if key in d:
                kw[key] = int(d[key])
        if "output_dir" in d:
            kw["output_dir"] = str(d["output_dir"])
        if "summary" in d:
            kw["summary"] = bool(d["summary"])
        for key in ("tasks", "feature_sets", "learners"):
            if key in d:
                kw[key] = tuple(d[key] or ())
        try:
            if "data" in d:
                kw["data"] = DataConfig.from_dict(_section(d, "data"))
            if "split" in d:
                s = _section(d, "split")
                _reject_unknown("split", s, {"ratios", "min_stratum"})
                kw["split"] = SplitConfig(tuple(float(v) for v in s.get("ratios", (8, 1, 1))),
                                          int(s.get("min_stratum", 3)))
            if "impute" in d:
                s = _section(d, "impute")
                _reject_unknown("impute", s, {f.name for f in fields(ImputeStage)})
                kw["impute"] = ImputeStage(**s)
            if "train" in d:
                kw["train"] = _train_from_dict(_section(d, "train"))
            if "sfs" in d:
                s = dict(_section(d, "sfs"))
                _reject_unknown("sfs", s, {f.name for f in fields(SfsConfig)})
                if s.get("retrain_learners") is not None:
                    s["retrain_learners"] = tuple(s["retrain_learners"])
                kw["sfs"] = SfsConfig(**s)
            if "inspection" in d:
                s = dict(_section(d, "inspection"))
                _reject_unknown("inspection", s, {f.name for f in fields(InspectConfig)})
                if "learners" in s:
                    s["learners"] = tuple(s["learners"])
                kw["inspection"] = InspectConfig(**s)
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def _train_from_dict(d: Mapping) -> TrainConfig:
    _reject_unknown("train", d, {"logistic", "tree", "forest"})
    lr = _section(d, "logistic")
    tr = _section(d, "tree")
    fo = dict(_section(d, "forest"))
    _reject_unknown("train.logistic", lr, {f.name for f in fields(LogisticConfig)})
    _reject_unknown("train.tree", tr, {f.name for f in fields(TreeConfig)})
    _reject_unknown("train.forest", fo, {"n_trees", "mtry", "bootstrap", "tree"})
    forest_tree = _section(fo, "tree")
    _reject_unknown("train.forest.tree", forest_tree, {f.name for f in fields(TreeConfig)})
    fo["tree"] = TreeConfig(**forest_tree)
    return TrainConfig(LogisticConfig(**lr), TreeConfig(**tr), ForestConfig(**fo))


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
    if doc is not None and not isinstance(doc, Mapping):
        raise ConfigError(f"config {path} must be a mapping")
    return ExperimentConfig.from_dict(doc)


def dump_config(config: ExperimentConfig, path: str | Path | None = None) -> str:
    text = yaml.safe_dump(config.to_dict(), sort_keys=False, default_flow_style=None)
    if path is not None:
        Path(path).write_text(text)
    return text


# ------------------------------------------------------------------ cohort


@dataclass(frozen=True, eq=False)
class Cohort:
    """Target-filtered cohort with its stratified split."""

    table: SurveyTable
    labels: CohortLabels
    split: SplitAssignment
    n_loaded: int
    load_report: LoadReport | None = None


def load_data(config: DataConfig) -> tuple[SurveyTable, CohortLabels]:
    if config.source == "synthetic":
        return generate_synthetic(config.synthetic)
    codebook = load_codebook(config.codebook)
    table = load_tables(list(config.files), codebook, delimiter=config.delimiter)
    return table, derive_labels_from_codebook(table)


def prepare_cohort(config: ExperimentConfig, data: tuple[SurveyTable, CohortLabels] | None = None) -> Cohort:
    table, labels = data if data is not None else load_data(config.data)
    n_loaded = table.n_rows
    table, labels = filter_complete_targets(table, labels, config.data.required_targets)
    split = split_dataset(table.n_rows, labels.class4, config.seed, config.split.ratios, config.split.min_stratum)
    return Cohort(table, labels, split, n_loaded, table.load_report)


def design_matrix(table: SurveyTable) -> tuple[np.ndarray, tuple[str, ...]]:
    """Numeric matrix; categorical columns flagged ``one_hot`` become one
    indicator per declared code (missing stays missing in every indicator)."""
    cols, names = [], []
    for j, name in enumerate(table.columns):
        spec = table.spec(name)
        v = table.values[:, j]
        if spec is not None and spec.kind == "categorical" and spec.one_hot:
            for code in spec.valid_codes:
                cols.append(np.where(np.isnan(v), np.nan, (v == code).astype(float)))
                names.append(f"{name}={code}")
        else:
            cols.append(v)
            names.append(name)
    X = np.column_stack(cols) if cols else np.zeros((table.n_rows, 0))
    return X, tuple(names)


def prepare_feature_set(cohort: Cohort, name: str, impute: ImputeStage = ImputeStage(),
                        impute_report: ImputeReport | None = None) -> PreparedData:
    """Design matrix for one feature set, aligned with labels and split.

    Raises on an unusable set (unknown group, no complete cases, imputation
    failure); the caller turns that into skipped cells.
    """
    group = cohort.table.codebook.group(name)
    impute_it = name == "combined" and impute.combined_policy == "impute"
    t = select_features(cohort.table, group, "keep_missing" if impute_it else "complete_case")
    if impute_it:
        donors = cohort.split.train if impute.donors == "train" else None
        t = impute_knn(t, impute.knn(), donor_rows=donors, report=impute_report)
        labels, split = cohort.labels, cohort.split
    else:
        keep = np.zeros(cohort.table.n_rows, dtype=bool)
        keep[cohort.table.positions(t.row_ids)] = True
        labels, split = cohort.labels.take(np.flatnonzero(keep)), cohort.split.restrict(keep)
    X, names = design_matrix(t)
    if np.isnan(X).any():
        raise DataError(f"feature set {name!r} still has missing values")
    return PreparedData(name, X, names, labels, split)


# --------------------------------------------------------------- selection


def sfs_factory(task: str, learner: str, config: TrainConfig, n_trees: int, threads: int = 1):
    search = replace(config, forest=replace(config.forest, n_trees=n_trees))
    if task == "T3":
        return lambda X, y, s: train_multilabel(X, y, learner, search, s, threads)
    return lambda X, y, s: fit_binary(learner, X, y, search, s, threads)


def select_for_task(data: PreparedData, task: str, sfs: SfsConfig, config: TrainConfig, seed: int,
                    threads: int = 1):
    X_tr, y_tr = data.partition(task, "train")
    X_va, y_va = data.partition(task, "val")
    k = min(sfs.k, len(data.feature_names))
    learner_config = {"learner": sfs.learner, "n_trees": sfs.n_trees if sfs.learner == "forest" else None,
                      "cv_folds": sfs.cv_folds}
    return sfs_forward(X_tr, y_tr, X_va, y_va, sfs_factory(task, sfs.learner, config, sfs.n_trees), k,
                       seed=derive_seed(seed, SFS_KEY, TASKS.index(task)), feature_names=data.feature_names,
                       scorer=auc_metric, scorer_name=sfs.scorer, cv_folds=sfs.cv_folds,
                       learner_config=learner_config, threads=threads)


# -------------------------------------------------------------- inspection


def _head_curves(model, y_is_multi: bool):
    if y_is_multi:
        return ("autism", "adhd"), lambda m, Z: m.head_proba(Z)
    return ("positive",), lambda m, Z: m.predict_proba(Z)[:, 1:]


def _pd_grid(column: np.ndarray, max_points: int) -> np.ndarray:
    """Distinct observed values; imputed fractions snap to the integer levels
    around them; quantiles only for genuinely continuous columns."""
    values = np.unique(column)
    if len(values) <= max_points:
        return values
    levels = np.unique(np.rint(column))
    if len(levels) <= max_points:
        return levels
    return np.unique(np.quantile(column, np.linspace(0, 1, max_points)))


def inspect_cell(cell: Cell, data: PreparedData, config: InspectConfig, seed: int,
                 order: Sequence[str] | None = None) -> dict:
    """Permutation importance on the test partition, |coefficients| for
    logistic models and partial dependence for the first ``pd_features``
    features of ``order`` (default: by importance)."""
    X, y = data.partition(cell.task, "test")
    model = cell.model
    imp = permutation_importance(model, X, y, auc_metric, config.n_repeats,
                                 derive_seed(seed, INSPECT_KEY, TASKS.index(cell.task), LEARNERS.index(cell.learner)))
    names = data.feature_names
    out: dict[str, Any] = {
        "task": cell.task, "feature_set": cell.feature_set, "learner": cell.learner,
        "baseline_auc": imp.baseline,
        "permutation_importance": {f: {"mean": float(imp.scores[j]), "std": float(imp.std[j])}
                                   for j, f in enumerate(names)},
    }
    if isinstance(model, LinearModel):
        out["coefficient_abs"] = {f: float(v) for f, v in zip(names, coefficient_importance(model))}
    elif isinstance(model, MultilabelModel) and isinstance(model.asd_head, LinearModel):
        ca, cd = coefficient_importance(model.asd_head), coefficient_importance(model.adhd_head)
        out["coefficient_abs"] = {f: float((a + d) / 2) for f, a, d in zip(names, ca, cd)}
    if order is None:
        order = [names[j] for j in np.argsort(-imp.scores, kind="stable")]
    curve_names, proba = _head_curves(model, np.asarray(y).ndim == 2)
    pd_out = {}
    for f in list(order)[: config.pd_features]:
        j = names.index(f)
        grid, mean = partial_dependence(model, X, j, _pd_grid(X[:, j], config.pd_grid_max), proba)
        pd_out[f] = {"grid": [float(g) for g in grid],
                     "curves": {c: [float(v) for v in mean[:, h]] for h, c in enumerate(curve_names)}}
    out["partial_dependence"] = pd_out
    return out


# ---------------------------------------------------------------- workflow


def _skipped(task: str, feature_set: str, learner: str, exc: Exception) -> Cell:
    return Cell(task, feature_set, learner, status="skipped", reason=f"{type(exc).__name__}: {exc}")


def _map(fn, jobs: Sequence, threads: int) -> list:
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def run_workflow(config: ExperimentConfig, data: tuple[SurveyTable, CohortLabels] | None = None,
                 threads: int | None = None) -> EvaluationReport:
    """Run the whole workflow; ``data`` overrides ``config.data`` loading.

    Stage failures mark the affected cells skipped.  Only a failure to load
    or split the cohort aborts the run.  Timings go to ``report.meta``.
    """
    threads = config.threads if threads is None else int(threads)
    t_start = time.perf_counter()
    meta: dict[str, Any] = {"stages": {}}
    t0 = time.perf_counter()
    cohort = prepare_cohort(config, data)
    meta["stages"]["load_split_s"] = time.perf_counter() - t0

    report = EvaluationReport(config={k: v for k, v in config.to_dict().items() if k not in RUN_LOCAL_KEYS})
    report.data = {
        "n_loaded": cohort.n_loaded,
        "n_complete_targets": cohort.table.n_rows,
        "split": {"train": len(cohort.split.train), "val": len(cohort.split.val), "test": len(cohort.split.test)},
        "load": cohort.load_report.to_dict() if cohort.load_report is not None else None,
        "feature_sets": {},
    }
    if config.summary:
        try:
            report.cohort_summary = summarize_cohort(cohort.table, cohort.labels).to_dict()
        except ScreenkitError as exc:
            report.cohort_summary = {"status": "skipped", "reason": f"{type(exc).__name__}: {exc}"}

    needed = list(config.feature_sets)
    if config.sfs.enabled and config.sfs.feature_set not in needed:
        needed.append(config.sfs.feature_set)
    prepared: dict[str, PreparedData | Exception] = {}
    for name in needed:
        t0 = time.perf_counter()
        imp_report = ImputeReport()
        try:
            prepared[name] = prepare_feature_set(cohort, name, config.impute, imp_report)
            d = prepared[name]
            info = {"status": "ok", "n_rows": len(d.X), "features": list(d.feature_names),
                    "split": {"train": len(d.split.train), "val": len(d.split.val), "test": len(d.split.test)}}
            if imp_report.imputed_cells:
                info["imputation"] = imp_report.to_dict(include_runtime=False)
        except (ScreenkitError, ValueError) as exc:
            prepared[name] = exc
            info = {"status": "skipped", "reason": f"{type(exc).__name__}: {exc}"}
        report.data["feature_sets"][name] = info
        meta["stages"][f"prepare_{name}_s"] = time.perf_counter() - t0

    # cells run in parallel; forests inside them stay single-threaded
    jobs = [(t, fs, l) for fs in config.feature_sets for t in config.tasks for l in config.learners]

    def run_cell(job):
        task, fs, learner = job
        d = prepared[fs]
        if isinstance(d, Exception):
            return _skipped(task, fs, learner, d)
        return evaluate_cell(d, task, learner, config.train, config.seed, 1)

    t0 = time.perf_counter()
    report.cells = _map(run_cell, jobs, threads)
    meta["stages"]["cells_s"] = time.perf_counter() - t0

    if config.sfs.enabled:
        t0 = time.perf_counter()
        _selection_stage(config, prepared.get(config.sfs.feature_set), report, threads)
        meta["stages"]["selection_s"] = time.perf_counter() - t0

    meta["cell_runtimes_s"] = {"/".join(c.key): c.runtime_s for c in report.cells}
    meta["total_s"] = time.perf_counter() - t_start
    meta["threads"] = threads
    report.meta = meta
    return report


def _selection_stage(config: ExperimentConfig, data, report: EvaluationReport, threads: int) -> None:
    sfs = config.sfs
    learners = sfs.retrain_learners if sfs.retrain_learners is not None else config.learners
    for task in config.tasks:
        if isinstance(data, Exception) or data is None:
            reason = f"{type(data).__name__}: {data}" if data is not None else "feature set unavailable"
            report.selection[task] = {"status": "skipped", "reason": reason}
            report.cells.extend(Cell(task, "selected", l, status="skipped", reason=reason) for l in learners)
            continue
        try:
            trace = select_for_task(data, task, sfs, config.train, config.seed, threads)
        except (ScreenkitError, ValueError) as exc:
            report.selection[task] = {"status": "skipped", "reason": f"{type(exc).__name__}: {exc}"}
            report.cells.extend(_skipped(task, "selected", l, exc) for l in learners)
            continue
        report.selection[task] = {"status": "ok", "feature_set": data.name, **trace.to_dict()}
        sub = retrain_on_subset(data, trace.subset, [task], learners, config.train, config.seed, "selected", threads)
        report.cells.extend(sub.cells)
        if not config.inspection.enabled:
            continue
        restricted = data.restrict(trace.subset, "selected")
        for cell in sub.cells:
            if cell.status != "ok" or cell.learner not in config.inspection.learners:
                continue
            key = f"{task}_selected_{cell.learner}"
            try:
                report.inspection[key] = inspect_cell(cell, restricted, config.inspection, config.seed, trace.subset)
            except (ScreenkitError, ValueError) as exc:
                report.inspection[key] = {"status": "skipped", "reason": f"{type(exc).__name__}: {exc}"}


def run_meta(report: EvaluationReport, seed_source: str, started: datetime | None = None,
             output_dir: str | None = None) -> dict:
    """Sidecar contents: everything that legitimately varies between runs."""
    started = started or datetime.now(timezone.utc)
    return {
        "output_dir": output_dir,
        "started_utc": started.isoformat(),
        "finished_utc": datetime.now(timezone.utc).isoformat(),
        "seed": report.config.get("seed"),
        "seed_source": seed_source,
        "host": platform.node(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "screenkit": __version__,
        "config_hash": config_hash(report.config),
        **getattr(report, "meta", {}),
    }
