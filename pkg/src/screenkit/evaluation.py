"""Metrics and model inspection.

Confusion matrices are indexed ``[true, predicted]``.  ROC-AUC is the
Mann-Whitney statistic (ties count one half); :func:`roc_auc_sweep` is an
independent threshold-sweep/trapezoid implementation of the same quantity.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import DataError
from .rng import derive_rng

logger = logging.getLogger(__name__)

MODES = ("binary", "macro_ovr", "micro_ovr")


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    labels: tuple
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.total) if self.total else float("nan")

    def to_dict(self) -> dict:
        return {"labels": [str(l) for l in self.labels], "counts": self.counts.astype(int).tolist()}

    def __eq__(self, other):
        return (isinstance(other, ConfusionMatrix) and tuple(self.labels) == tuple(other.labels)
                and np.array_equal(self.counts, other.counts))


def confusion(y_true: Sequence, y_pred: Sequence, labels: Sequence) -> ConfusionMatrix:
    y_true, y_pred = list(y_true), list(y_pred)
    if len(y_true) != len(y_pred):
        raise ValueError("true and predicted labels differ in length")
    index = {l: i for i, l in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        t = t.item() if hasattr(t, "item") else t
        p = p.item() if hasattr(p, "item") else p
        if t not in index or p not in index:
            raise ValueError(f"label {t if t not in index else p!r} outside declared order {list(labels)}")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(tuple(labels), counts)


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else float("nan")


def ovr_rates(cm: ConfusionMatrix) -> dict:
    """Per-class one-vs-rest (recall, specificity); NaN where undefined."""
    c = cm.counts.astype(float)
    total = c.sum()
    out = {}
    for i, label in enumerate(cm.labels):
        tp = c[i, i]
        fn = c[i].sum() - tp
        fp = c[:, i].sum() - tp
        tn = total - tp - fn - fp
        out[label] = (_ratio(tp, tp + fn), _ratio(tn, tn + fp))
    return out


def sens_spec(cm: ConfusionMatrix, mode: str = "binary", positive=None) -> tuple[float, float]:
    """Sensitivity and specificity.

    ``binary`` uses ``positive`` (default: the second label) against the
    other class.  ``macro_ovr`` averages per-class one-vs-rest rates,
    skipping classes whose denominator is zero; ``micro_ovr`` pools counts.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "binary":
        if len(cm.labels) != 2:
            raise ValueError("binary mode needs exactly two classes")
        positive = cm.labels[1] if positive is None else positive
        return ovr_rates(cm)[positive]
    rates = ovr_rates(cm)
    if mode == "micro_ovr":
        c = cm.counts.astype(float)
        total = c.sum()
        tp = np.trace(c)
        # pooled over classes: sum(TP+FN) = total, sum(TN+FP) = (k-1) * total
        fp = total - tp
        tn = (len(cm.labels) - 1) * total - fp
        return _ratio(tp, total), _ratio(tn, tn + fp)
    sens = [r for r, _ in rates.values() if not math.isnan(r)]
    spec = [s for _, s in rates.values() if not math.isnan(s)]
    excluded = [l for l, (r, s) in rates.items() if math.isnan(r) or math.isnan(s)]
    if excluded:
        logger.info("macro average excludes classes with empty denominators: %s", excluded)
    return (float(np.mean(sens)) if sens else float("nan"), float(np.mean(spec)) if spec else float("nan"))


def _check_binary(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels).ravel().astype(bool)
    if len(scores) != len(labels):
        raise ValueError("scores and labels differ in length")
    if labels.all() or not labels.any():
        raise DataError("ROC-AUC is undefined when only one class is present")
    return scores, labels


def roc_auc(scores, labels) -> float:
    """Rank (Mann-Whitney) estimate of P(score_pos > score_neg) + P(tie)/2."""
    scores, labels = _check_binary(scores, labels)
    ranks = rankdata(scores)  # average ranks for ties
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def roc_curve(scores, labels) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(fpr, tpr, thresholds) sweeping every distinct score from high to low."""
    scores, labels = _check_binary(scores, labels)
    thresholds = np.unique(scores)[::-1]
    n_pos, n_neg = labels.sum(), (~labels).sum()
    tpr, fpr = [0.0], [0.0]
    for t in thresholds:
        at_or_above = scores >= t
        tpr.append((at_or_above & labels).sum() / n_pos)
        fpr.append((at_or_above & ~labels).sum() / n_neg)
    return np.asarray(fpr), np.asarray(tpr), thresholds


def roc_auc_sweep(scores, labels) -> float:
    """Trapezoidal area under the threshold-sweep ROC curve."""
    fpr, tpr, _ = roc_curve(scores, labels)
    return float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2))


@dataclass
class MetricReport:
    accuracy: float
    sensitivity: float
    specificity: float
    roc_auc: float | Mapping[str, float]
    averaging: str
    per_class: Mapping[str, tuple[float, float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "accuracy": self.accuracy,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "roc_auc": dict(self.roc_auc) if isinstance(self.roc_auc, Mapping) else self.roc_auc,
            "averaging": self.averaging,
        }
        if self.per_class:
            d["per_class"] = {str(k): {"recall": r, "specificity": s} for k, (r, s) in self.per_class.items()}
        return d


def _safe_auc(scores, labels) -> float:
    try:
        return roc_auc(scores, labels)
    except DataError:
        return float("nan")


def binary_report(y_true, p_pos, threshold: float = 0.5) -> tuple[MetricReport, ConfusionMatrix]:
    """Positive prediction iff ``p > threshold``."""
    y_true = np.asarray(y_true).astype(int)
    p_pos = np.asarray(p_pos, dtype=float)
    pred = (p_pos > threshold).astype(int)
    cm = confusion(y_true, pred, (0, 1))
    sens, spec = sens_spec(cm, "binary")
    return MetricReport(cm.accuracy, sens, spec, _safe_auc(p_pos, y_true), "binary"), cm


def multilabel_report(Y_true, heads, mode: str = "macro_ovr",
                      class_names: Sequence[str] = ("None", "AutismOnly", "AdhdOnly", "Both")):
    """4-way metrics from two head probabilities (columns autism, ADHD)."""
    Y_true = np.asarray(Y_true).astype(bool)
    heads = np.asarray(heads, dtype=float)
    true4 = Y_true[:, 0].astype(int) + 2 * Y_true[:, 1].astype(int)
    pred4 = (heads[:, 0] > 0.5).astype(int) + 2 * (heads[:, 1] > 0.5).astype(int)
    cm = confusion(true4, pred4, (0, 1, 2, 3))
    cm = ConfusionMatrix(tuple(class_names), cm.counts)
    sens, spec = sens_spec(cm, mode)
    auc = {"autism": _safe_auc(heads[:, 0], Y_true[:, 0]), "adhd": _safe_auc(heads[:, 1], Y_true[:, 1])}
    return MetricReport(cm.accuracy, sens, spec, auc, mode, ovr_rates(cm)), cm


# ------------------------------------------------------------- inspection


def auc_metric(model, X, y) -> float:
    """ROC-AUC for binary models; mean of the two head AUCs for multilabel."""
    y = np.asarray(y)
    if y.ndim == 2:
        heads = model.head_proba(X)
        return float(np.mean([roc_auc(heads[:, h], y[:, h]) for h in range(2)]))
    return roc_auc(model.predict_proba(X)[:, 1], y)


@dataclass
class Importance:
    scores: np.ndarray  # mean drop per feature
    std: np.ndarray
    baseline: float
    raw: np.ndarray  # (p, n_repeats)


def permutation_importance(model, X, y, metric: Callable = auc_metric, n_repeats: int = 5,
                           seed: int = 0) -> Importance:
    """Mean decrease of ``metric`` when one column is shuffled.

    The shuffle for (feature j, repeat r) comes from ``derive_rng(seed, j, r)``.
    """
    X = np.asarray(X, dtype=float)
    baseline = float(metric(model, X, y))
    p = X.shape[1]
    raw = np.zeros((p, n_repeats))
    for j in range(p):
        for r in range(n_repeats):
            Xp = X.copy()
            Xp[:, j] = X[derive_rng(seed, j, r).permutation(len(X)), j]
            raw[j, r] = baseline - float(metric(model, Xp, y))
    return Importance(raw.mean(axis=1), raw.std(axis=1), baseline, raw)


def coefficient_importance(model) -> np.ndarray:
    """|w| of a logistic model on its standardised inputs."""
    return np.abs(np.asarray(model.weights, dtype=float))


def partial_dependence(model, X, feature: int, grid=None, proba: Callable | None = None):
    """Mean predicted probability with column ``feature`` clamped to each grid value.

    ``grid`` defaults to the distinct observed values.  ``proba(model, X)``
    chooses which probabilities to average (default ``predict_proba``).
    """
    X = np.asarray(X, dtype=float)
    grid = np.unique(X[:, feature]) if grid is None else np.asarray(grid, dtype=float)
    proba = proba or (lambda m, Z: m.predict_proba(Z))
    out = []
    for v in grid:
        Xv = X.copy()
        Xv[:, feature] = v
        out.append(np.asarray(proba(model, Xv)).mean(axis=0))
    return grid, np.asarray(out)
