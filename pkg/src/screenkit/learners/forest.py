"""Random forest: bootstrap resamples, ``mtry`` features per split, mean of
tree probability vectors.

Tree ``t`` draws all of its randomness (bootstrap indices, then per-node
feature keys) from ``derive_rng(seed, t)``, so the forest does not depend on
how tree fits are scheduled across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..rng import derive_rng, derive_seed
from .tree import Tree, TreeConfig, train_tree


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    mtry: int | str | None = "sqrt"  # "sqrt" -> ceil(sqrt(p)); None -> all features
    bootstrap: bool = True
    seed: int = 0
    tree: TreeConfig = field(default_factory=TreeConfig)

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigError("n_trees must be positive")
        if isinstance(self.mtry, str) and self.mtry not in ("sqrt", "all"):
            raise ConfigError(f"unknown mtry rule {self.mtry!r}")

    def resolve_mtry(self, p: int) -> int:
        if self.mtry is None or self.mtry == "all":
            return p
        if self.mtry == "sqrt":
            return max(1, math.ceil(math.sqrt(p)))
        return max(1, min(int(self.mtry), p))


@dataclass(eq=False)
class Forest:
    trees: list[Tree]
    tree_seeds: list[int]
    mtry: int
    root_seed: int
    bootstrap: bool

    @property
    def n_features(self) -> int:
        return self.trees[0].n_features

    @property
    def n_classes(self) -> int:
        return self.trees[0].n_classes

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        total = self.trees[0].predict_proba(X).copy()
        for t in self.trees[1:]:
            total += t.predict_proba(X)
        return total / len(self.trees)


def _fit_one(X, y, config: ForestConfig, mtry: int, n_classes: int, t: int) -> Tree:
    rng = derive_rng(config.seed, t)
    if config.bootstrap:
        rows = rng.integers(0, len(X), len(X))
        Xt, yt = X[rows], y[rows]
    else:
        Xt, yt = X, y
    return train_tree(Xt, yt, config.tree, rng=rng, mtry=mtry, n_classes=n_classes)


def train_forest(
    X: np.ndarray,
    y: np.ndarray,
    config: ForestConfig = ForestConfig(),
    n_classes: int | None = None,
    threads: int = 1,
) -> Forest:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    n_classes = max(2, int(y.max()) + 1 if n_classes is None else n_classes)
    mtry = config.resolve_mtry(X.shape[1])
    jobs = range(config.n_trees)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            trees = list(pool.map(lambda t: _fit_one(X, y, config, mtry, n_classes, t), jobs))
    else:
        trees = [_fit_one(X, y, config, mtry, n_classes, t) for t in jobs]
    seeds = [derive_seed(config.seed, t) for t in jobs]
    return Forest(trees, seeds, mtry, config.seed, config.bootstrap)
