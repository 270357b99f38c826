"""From-scratch learners: logistic regression, CART tree, random forest and
the two-head multilabel wrapper."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import ConfigError
from ..rng import derive_seed
from .forest import Forest, ForestConfig, train_forest
from .logistic import LinearModel, LogisticConfig, logistic_loss_grad, train_logistic
from .multilabel import MultilabelModel, fit_heads, joint_proba
from .tree import Tree, TreeConfig, gini, train_tree

LEARNERS = ("logistic", "tree", "forest")


@dataclass(frozen=True)
class TrainConfig:
    logistic: LogisticConfig = field(default_factory=LogisticConfig)
    tree: TreeConfig = field(default_factory=TreeConfig)
    forest: ForestConfig = field(default_factory=ForestConfig)


def fit_binary(kind: str, X: np.ndarray, y: np.ndarray, config: TrainConfig = TrainConfig(),
               seed: int = 0, threads: int = 1):
    """Train one binary classifier of the given kind; ``seed`` feeds only the forest."""
    if kind == "logistic":
        return train_logistic(X, y, config.logistic)
    if kind == "tree":
        return train_tree(X, y, config.tree, n_classes=2)
    if kind == "forest":
        return train_forest(X, y, replace(config.forest, seed=seed), n_classes=2, threads=threads)
    raise ConfigError(f"unknown learner {kind!r}")


def train_multilabel(X: np.ndarray, labels: np.ndarray, kind: str, config: TrainConfig = TrainConfig(),
                     seed: int = 0, threads: int = 1) -> MultilabelModel:
    """Autism head and ADHD head trained independently; head ``h`` uses seed
    ``derive_seed(seed, h)``."""
    return fit_heads(X, labels, lambda Xh, yh, h: fit_binary(kind, Xh, yh, config, derive_seed(seed, h), threads))


def predict_proba(model, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got shape {X.shape}")
    return model.predict_proba(X)


__all__ = [
    "LEARNERS", "TrainConfig", "fit_binary", "train_multilabel", "predict_proba",
    "LinearModel", "LogisticConfig", "logistic_loss_grad", "train_logistic",
    "Tree", "TreeConfig", "gini", "train_tree",
    "Forest", "ForestConfig", "train_forest",
    "MultilabelModel", "fit_heads", "joint_proba",
]
