"""Sequential forward selection wrapped around any learner.

At step ``t`` every remaining feature ``j`` is tried: the learner is fit on
the current subset plus ``j`` (columns kept in original index order) with
seed ``derive_seed(seed, t, j)`` and scored on the validation partition.
The best score wins; scores within 1e-12 count as tied and the lower feature
index wins.  The test partition is not an input.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .evaluation import auc_metric
from .learners import TrainConfig
from .report import EvaluationReport
from .rng import derive_rng, derive_seed
from .tasks import PreparedData, evaluate_cell

TIE_TOL = 1e-12


@dataclass
class SelectionTrace:
    steps: list[tuple[str, float]]
    subset: list[str]
    indices: list[int]
    scorer: str
    learner: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "steps": [{"feature": f, "score": s} for f, s in self.steps],
            "subset": list(self.subset),
            "indices": list(self.indices),
            "scorer": self.scorer,
            "learner": self.learner,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SelectionTrace":
        return cls([(s["feature"], s["score"]) for s in d["steps"]], list(d["subset"]), list(d["indices"]),
                   d["scorer"], dict(d.get("learner", {})))


def _check_labels(y: np.ndarray, where: str) -> None:
    cols = y if y.ndim == 2 else y[:, None]
    for h in range(cols.shape[1]):
        v = np.asarray(cols[:, h]).astype(bool)
        if v.all() or not v.any():
            raise DataError(f"{where} labels contain a single class")


def stratified_folds(y: np.ndarray, n_folds: int, seed: int) -> np.ndarray:
    """Fold id per row, balanced within each label (or label pair) value."""
    key = y[:, 0].astype(int) + 2 * y[:, 1].astype(int) if y.ndim == 2 else np.asarray(y).astype(int)
    folds = np.empty(len(key), dtype=np.int64)
    rng = derive_rng(seed, 0xF01D)
    for level in np.unique(key):
        rows = np.flatnonzero(key == level)
        rows = rows[rng.permutation(len(rows))]
        folds[rows] = np.arange(len(rows)) % n_folds
    return folds


def sfs_forward(
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_val: np.ndarray | None,
    y_val: np.ndarray | None,
    learner_factory: Callable,
    k: int,
    seed: int = 0,
    feature_names: Sequence[str] | None = None,
    scorer: Callable = auc_metric,
    scorer_name: str = "roc_auc",
    cv_folds: int | None = None,
    learner_config: dict | None = None,
    threads: int = 1,
) -> SelectionTrace:
    """Greedy forward selection of ``k`` features.

    ``learner_factory(X, y, seed)`` returns a fitted model; ``scorer(model,
    X, y)`` scores it.  With ``cv_folds`` the score is the mean over
    stratified folds of the training data and ``X_val``/``y_val`` are unused.
    """
    X_train = np.asarray(X_train, dtype=float)
    y_train = np.asarray(y_train)
    p = X_train.shape[1]
    names = list(feature_names) if feature_names is not None else [f"x{j}" for j in range(p)]
    if len(names) != p:
        raise ValueError("feature_names length differs from the column count")
    if not 1 <= k <= p:
        raise ConfigError(f"k={k} must be between 1 and the feature count {p}")
    _check_labels(y_train, "training")
    if cv_folds is None:
        if X_val is None or y_val is None:
            raise ValueError("validation data required unless cv_folds is set")
        X_val = np.asarray(X_val, dtype=float)
        y_val = np.asarray(y_val)
        _check_labels(y_val, "validation")
        folds = None
    else:
        if cv_folds < 2:
            raise ConfigError("cv_folds must be >= 2")
        folds = stratified_folds(y_train, cv_folds, seed)

    def score(cols: list[int], s: int) -> float:
        if folds is None:
            model = learner_factory(X_train[:, cols], y_train, s)
            return float(scorer(model, X_val[:, cols], y_val))
        vals = []
        for f in range(cv_folds):
            tr, te = folds != f, folds == f
            model = learner_factory(X_train[tr][:, cols], y_train[tr], derive_seed(s, f))
            vals.append(float(scorer(model, X_train[te][:, cols], y_train[te])))
        return float(np.mean(vals))

    selected: list[int] = []
    steps: list[tuple[str, float]] = []
    for t in range(k):
        remaining = [j for j in range(p) if j not in selected]
        jobs = [(j, sorted(selected + [j]), derive_seed(seed, t, j)) for j in remaining]
        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                scores = list(pool.map(lambda job: score(job[1], job[2]), jobs))
        else:
            scores = [score(cols, s) for _, cols, s in jobs]
        top = max(scores)
        # lowest index among the scores tied with the maximum
        pick = next(i for i, s in enumerate(scores) if s >= top - TIE_TOL)
        best_j, best = remaining[pick], scores[pick]
        selected.append(best_j)
        steps.append((names[best_j], best))
    return SelectionTrace(steps, [names[j] for j in selected], selected, scorer_name, learner_config or {})


def retrain_on_subset(
    data: PreparedData,
    subset: Sequence[str | int],
    tasks: Sequence[str],
    learners: Sequence[str],
    config: TrainConfig = TrainConfig(),
    seed: int = 0,
    feature_set: str = "selected",
    threads: int = 1,
) -> EvaluationReport:
    """Evaluate every (task, learner) on ``data`` restricted to ``subset``."""
    if not subset:
        raise ConfigError("subset must be non-empty")
    restricted = data.restrict(subset, feature_set)
    cells = [evaluate_cell(restricted, t, l, config, seed, threads) for t in tasks for l in learners]
    return EvaluationReport(cells=cells)
