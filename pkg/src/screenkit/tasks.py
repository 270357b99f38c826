"""Classification tasks and single-cell evaluation.

* ``T1`` any listed condition vs none.
* ``T2`` autism or ADHD vs none; rows with only other conditions are
  excluded (they are neither positive nor "without any condition").
* ``T3`` multilabel (autism, ADHD) pair, evaluated through the four-way rule.

A *cell* is one (task, feature set, learner) combination: train on the
training partition, evaluate on the test partition.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field, is_dataclass
from typing import Any, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .evaluation import ConfusionMatrix, MetricReport, binary_report, multilabel_report
from .learners import LEARNERS, TrainConfig, fit_binary, train_multilabel
from .learners.io import dumps
from .rng import derive_seed
from .survey_data import CohortLabels, SplitAssignment

TASKS = ("T1", "T2", "T3")
TASK_TITLES = {
    "T1": "Any neurodevelopmental condition vs None",
    "T2": "Autism or ADHD vs None",
    "T3": "Multilabel autism + ADHD",
}


@dataclass(frozen=True, eq=False)
class TaskTarget:
    y: np.ndarray  # (n,) int for T1/T2, (n, 2) bool for T3
    include: np.ndarray


def task_labels(labels: CohortLabels, task: str) -> TaskTarget:
    if task == "T1":
        y = labels.any_condition()
        return TaskTarget(y.astype(int), np.ones(labels.n_rows, dtype=bool))
    if task == "T2":
        y = labels.asd_flag | labels.adhd_flag
        return TaskTarget(y.astype(int), y | ~labels.any_condition())
    if task == "T3":
        return TaskTarget(np.column_stack([labels.asd_flag, labels.adhd_flag]), np.ones(labels.n_rows, dtype=bool))
    raise ConfigError(f"unknown task {task!r}")


@dataclass(frozen=True, eq=False)
class PreparedData:
    """A complete design matrix with aligned labels and split."""

    name: str
    X: np.ndarray
    feature_names: tuple[str, ...]
    labels: CohortLabels
    split: SplitAssignment

    def restrict(self, features: Sequence[str | int], name: str | None = None) -> "PreparedData":
        idx = [self.feature_names.index(f) if isinstance(f, str) else int(f) for f in features]
        return PreparedData(name or self.name, self.X[:, idx], tuple(self.feature_names[i] for i in idx),
                            self.labels, self.split)

    def partition(self, task: str, part: str) -> tuple[np.ndarray, np.ndarray]:
        target = task_labels(self.labels, task)
        rows = getattr(self.split, part)
        rows = rows[target.include[rows]]
        return self.X[rows], target.y[rows]


def _jsonable(obj):
    if is_dataclass(obj):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def config_hash(obj) -> str:
    return hashlib.sha256(json.dumps(_jsonable(obj), sort_keys=True).encode()).hexdigest()[:16]


@dataclass(eq=False)
class Cell:
    task: str
    feature_set: str
    learner: str
    status: str = "ok"
    reason: str = ""
    metrics: MetricReport | None = None
    confusion: ConfusionMatrix | None = None
    n_train: int = 0
    n_test: int = 0
    features: tuple[str, ...] = ()
    config_hash: str = ""
    model_sha256: str = ""
    runtime_s: float = 0.0
    model: Any = field(default=None, repr=False)

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.task, self.feature_set, self.learner)

    def to_dict(self) -> dict:
        d = {"task": self.task, "feature_set": self.feature_set, "learner": self.learner, "status": self.status}
        if self.status != "ok":
            d["reason"] = self.reason
            return d
        d.update(
            metrics=self.metrics.to_dict(),
            confusion=self.confusion.to_dict(),
            n_train=self.n_train,
            n_test=self.n_test,
            features=list(self.features),
            config_hash=self.config_hash,
            model_sha256=self.model_sha256,
        )
        return d


def cell_seed(root: int, task: str, learner: str) -> int:
    # independent of the feature set, so a retrain on an identical matrix
    # reproduces the original cell exactly
    return derive_seed(root, TASKS.index(task), LEARNERS.index(learner))


def _learner_config(learner: str, config: TrainConfig) -> dict:
    return _jsonable(getattr(config, learner))


def evaluate_cell(data: PreparedData, task: str, learner: str, config: TrainConfig = TrainConfig(),
                  seed: int = 0, threads: int = 1) -> Cell:
    cell = Cell(task, data.name, learner, features=data.feature_names,
                config_hash=config_hash({"task": task, "learner": learner, "config": _learner_config(learner, config),
                                         "features": list(data.feature_names), "seed": seed}))
    t0 = time.perf_counter()
    try:
        X_tr, y_tr = data.partition(task, "train")
        X_te, y_te = data.partition(task, "test")
        if len(X_tr) == 0 or len(X_te) == 0:
            raise DataError("empty training or test partition")
        heads = y_tr if y_tr.ndim == 2 else y_tr[:, None]
        for h in range(heads.shape[1]):
            if len(np.unique(heads[:, h])) < 2:
                raise DataError("training labels contain a single class")
        s = cell_seed(seed, task, learner)
        if task == "T3":
            model = train_multilabel(X_tr, y_tr, learner, config, s, threads)
            metrics, cm = multilabel_report(y_te, model.head_proba(X_te))
        else:
            model = fit_binary(learner, X_tr, y_tr, config, s, threads)
            metrics, cm = binary_report(y_te, model.predict_proba(X_te)[:, 1])
    except (DataError, ConfigError, ValueError) as exc:
        cell.status, cell.reason = "skipped", f"{type(exc).__name__}: {exc}"
        cell.runtime_s = time.perf_counter() - t0
        return cell
    cell.metrics, cell.confusion, cell.model = metrics, cm, model
    cell.n_train, cell.n_test = len(X_tr), len(X_te)
    cell.model_sha256 = hashlib.sha256(dumps(model).encode()).hexdigest()
    cell.runtime_s = time.perf_counter() - t0
    return cell
