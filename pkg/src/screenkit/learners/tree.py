"""CART classification tree with Gini impurity.

Split candidates are midpoints between consecutive distinct values present
in a node; a row goes left when ``x <= threshold``.  Among equally good
splits the lower feature index, then the lower threshold, wins.  Zero-gain
splits of impure nodes are allowed (needed for XOR-like structure).

The tree is stored as flat node arrays; node 0 is the root and ``left == -1``
marks a leaf.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from ..errors import ConfigError

LEAF = -1


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int = 12
    min_samples_leaf: int = 5
    criterion: str = "gini"

    def __post_init__(self):
        if self.max_depth < 0 or self.min_samples_leaf < 1:
            raise ConfigError("max_depth must be >= 0 and min_samples_leaf >= 1")
        if self.criterion != "gini":
            raise ConfigError(f"unsupported criterion {self.criterion!r}")


def gini(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    if n == 0:
        return 0.0
    q = counts / n
    return float(1.0 - np.sum(q * q))


@dataclass(eq=False)
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # (n_nodes, n_classes) class probabilities
    n_features: int

    @property
    def n_classes(self) -> int:
        return self.value.shape[1]

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def is_leaf(self, node: int) -> bool:
        return self.left[node] == LEAF

    def depth(self) -> int:
        best, stack = 0, [(0, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if self.left[node] != LEAF:
                stack.extend([(self.left[node], d + 1), (self.right[node], d + 1)])
        return best

    def used_features(self) -> set[int]:
        return {int(f) for f, l in zip(self.feature, self.left) if l != LEAF}

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        X = np.asarray(X, dtype=float)
        node = np.zeros(len(X), dtype=np.int64)
        active = self.left[node] != LEAF
        rows = np.arange(len(X))
        while active.any():
            r = rows[active]
            nd = node[r]
            go_left = X[r, self.feature[nd]] <= self.threshold[nd]
            node[r] = np.where(go_left, self.left[nd], self.right[nd])
            active[r] = self.left[node[r]] != LEAF
        return node

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


def _encode(X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-feature rank codes plus the packed sorted distinct values."""
    n, p = X.shape
    codes = np.empty((n, p), dtype=np.int32)
    levels, offsets = [], [0]
    for f in range(p):
        u, inv = np.unique(X[:, f], return_inverse=True)
        codes[:, f] = inv.reshape(-1)
        levels.append(u)
        offsets.append(offsets[-1] + len(u))
    flat = np.concatenate(levels) if levels else np.zeros(0)
    return codes, flat.astype(np.float64), np.asarray(offsets, dtype=np.int64)


def max_node_count(n: int, max_depth: int, min_samples_leaf: int) -> int:
    leaves = max(1, n // min_samples_leaf)
    if max_depth < 62:
        leaves = min(leaves, 1 << max_depth)
    return 2 * leaves - 1


@numba.njit(cache=True, nogil=True)
def _build(codes, y, levels, offsets, n_classes, max_depth, min_leaf, mtry, feat_keys):
    n, p = codes.shape
    max_nodes = feat_keys.shape[0] if feat_keys.shape[0] > 0 else 2 * n + 1
    feature = np.full(max_nodes, -1, np.int64)
    threshold = np.zeros(max_nodes, np.float64)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    value = np.zeros((max_nodes, n_classes), np.float64)

    idx = np.arange(n)
    stack_node = np.zeros(max_nodes, np.int64)
    stack_start = np.zeros(max_nodes, np.int64)
    stack_end = np.zeros(max_nodes, np.int64)
    stack_depth = np.zeros(max_nodes, np.int64)
    top = 1
    stack_end[0] = n
    n_nodes = 1

    counts = np.zeros(n_classes, np.float64)
    left_counts = np.zeros(n_classes, np.float64)
    all_features = np.arange(p)
    max_levels = 1
    for f in range(p):
        max_levels = max(max_levels, offsets[f + 1] - offsets[f])
    hist = np.zeros(max_levels * n_classes, np.float64)
    level_tot = np.zeros(max_levels, np.float64)

    while top > 0:
        top -= 1
        node = stack_node[top]
        start = stack_start[top]
        end = stack_end[top]
        depth = stack_depth[top]
        m = end - start

        counts[:] = 0.0
        for r in range(start, end):
            counts[y[idx[r]]] += 1.0
        for c in range(n_classes):
            value[node, c] = counts[c] / m
        n_present = 0
        for c in range(n_classes):
            if counts[c] > 0:
                n_present += 1
        if n_present <= 1 or depth >= max_depth or m < 2 * min_leaf:
            continue

        if mtry >= p:
            cand = all_features
        else:
            cand = np.sort(np.argsort(feat_keys[node])[:mtry])

        best_score = -1.0
        best_f = -1
        best_level = -1
        tol = 1e-12 * m
        for fi in range(cand.shape[0]):
            f = cand[fi]
            L = offsets[f + 1] - offsets[f]
            if L < 2:
                continue
            hist[: L * n_classes] = 0.0
            level_tot[:L] = 0.0
            for r in range(start, end):
                code = codes[idx[r], f]
                hist[code * n_classes + y[idx[r]]] += 1.0
                level_tot[code] += 1.0
            left_counts[:] = 0.0
            n_left = 0.0
            prev = -1
            for lv in range(L):
                if level_tot[lv] == 0.0:
                    continue
                if prev >= 0 and n_left >= min_leaf and m - n_left >= min_leaf:
                    sl = 0.0
                    sr = 0.0
                    for c in range(n_classes):
                        cl = left_counts[c]
                        cr = counts[c] - cl
                        sl += cl * cl
                        sr += cr * cr
                    score = sl / n_left + sr / (m - n_left)
                    if score > best_score + tol:
                        best_score = score
                        best_f = f
                        best_level = prev
                        threshold[node] = 0.5 * (levels[offsets[f] + prev] + levels[offsets[f] + lv])
                for c in range(n_classes):
                    left_counts[c] += hist[lv * n_classes + c]
                n_left += level_tot[lv]
                prev = lv

        if best_f < 0:
            continue

        # partition idx[start:end] so rows with code <= best_level come first
        i = start
        j = end - 1
        while i <= j:
            if codes[idx[i], best_f] <= best_level:
                i += 1
            else:
                tmp = idx[i]
                idx[i] = idx[j]
                idx[j] = tmp
                j -= 1
        feature[node] = best_f
        left[node] = n_nodes
        right[node] = n_nodes + 1
        n_nodes += 2
        # right pushed first so the left subtree is expanded next
        stack_node[top] = right[node]
        stack_start[top] = i
        stack_end[top] = end
        stack_depth[top] = depth + 1
        top += 1
        stack_node[top] = left[node]
        stack_start[top] = start
        stack_end[top] = i
        stack_depth[top] = depth + 1
        top += 1

    return feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes], value[:n_nodes]


def train_tree(
    X: np.ndarray,
    y: np.ndarray,
    config: TreeConfig = TreeConfig(),
    rng: np.random.Generator | None = None,
    mtry: int | None = None,
    n_classes: int | None = None,
) -> Tree:
    """Greedy CART fit.  ``mtry`` features are sampled (without replacement,
    from ``rng``) at every split; by default all features are scanned."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) != len(y) or len(y) == 0:
        raise ValueError("X must be 2-D with one row per label and at least one row")
    n, p = X.shape
    if n_classes is None:
        n_classes = int(y.max()) + 1
    n_classes = max(n_classes, 2)
    mtry = p if mtry is None else int(mtry)
    if not 1 <= mtry <= p:
        raise ConfigError(f"mtry must be in [1, {p}]")
    codes, levels, offsets = _encode(X)
    max_nodes = max_node_count(n, config.max_depth, config.min_samples_leaf)
    if mtry < p:
        if rng is None:
            raise ValueError("feature subsampling needs an rng")
        keys = rng.random((max_nodes, p))
    else:
        keys = np.zeros((max_nodes, 1))
    feature, threshold, left, right, value = _build(
        codes, y, levels, offsets, n_classes, config.max_depth, config.min_samples_leaf, mtry, keys,
    )
    feature = np.where(left == LEAF, -1, feature)
    return Tree(feature.copy(), threshold.copy(), left.copy(), right.copy(), value.copy(), p)
