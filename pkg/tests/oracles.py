"""Reference implementations written independently of the package.

Each one is the slow, obvious version of an algorithm: explicit loops, no
vectorisation tricks, no shared helpers with the code under test.
"""

from __future__ import annotations

import math

import numpy as np


def pair_count_auc(scores, labels) -> float:
    """P(pos > neg) + 1/2 P(tie) by enumerating every pair."""
    pos = [s for s, l in zip(scores, labels) if l]
    neg = [s for s, l in zip(scores, labels) if not l]
    total = 0.0
    for a in pos:
        for b in neg:
            total += 1.0 if a > b else 0.5 if a == b else 0.0
    return total / (len(pos) * len(neg))


def sweep_auc(scores, labels) -> float:
    """Trapezoid area under the ROC curve traced by lowering a threshold
    through every distinct score."""
    scores = [float(s) for s in scores]
    labels = [bool(l) for l in labels]
    P = sum(labels)
    N = len(labels) - P
    pts = [(0.0, 0.0)]
    for t in sorted(set(scores), reverse=True):
        tp = sum(1 for s, l in zip(scores, labels) if s >= t and l)
        fp = sum(1 for s, l in zip(scores, labels) if s >= t and not l)
        pts.append((fp / N, tp / P))
    area = 0.0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        area += (x1 - x0) * (y0 + y1) / 2
    return area


def brute_knn_impute(X, M, k, donors=None, weighting="uniform"):
    """All-pairs kNN imputation.  Ties at equal distance go to the lower
    donor index; a row never donates to itself."""
    X = np.asarray(X, dtype=float)
    M = np.asarray(M, dtype=bool)
    n, p = X.shape
    donors = list(range(n)) if donors is None else sorted(int(d) for d in donors)
    out = X.copy()
    for i in range(n):
        for j in range(p):
            if not M[i, j]:
                continue
            cands = []
            for d in donors:
                if d == i or M[d, j]:
                    continue
                shared = [c for c in range(p) if not M[i, c] and not M[d, c]]
                if not shared:
                    continue
                ss = 0.0
                for c in shared:
                    ss += (X[i, c] - X[d, c]) ** 2
                cands.append((math.sqrt(p / len(shared) * ss), d))
            cands.sort()
            chosen = sorted(cands[:k], key=lambda t: t[1])
            vals = [X[d, j] for _, d in chosen]
            if weighting == "uniform":
                out[i, j] = sum(vals) / len(vals)
            else:
                zero = [v for (dist, _), v in zip(chosen, vals) if dist == 0]
                if zero:
                    out[i, j] = sum(zero) / len(zero)
                else:
                    w = [1 / dist for dist, _ in chosen]
                    out[i, j] = sum(a * b for a, b in zip(w, vals)) / sum(w)
    return out


def central_difference(f, theta, h=1e-5):
    theta = np.asarray(theta, dtype=float)
    g = np.zeros_like(theta)
    for i in range(len(theta)):
        e = np.zeros_like(theta)
        e[i] = h
        g[i] = (f(theta + e) - f(theta - e)) / (2 * h)
    return g


def spawn_seed(root, *keys) -> int:
    """Seed addressing used throughout the package, restated directly on
    SeedSequence."""
    return int(np.random.SeedSequence(root, spawn_key=keys).generate_state(1)[0])


def stepwise_sfs(X_tr, y_tr, X_va, y_va, fit, score, k, seed):
    """Every remaining candidate scored at every step; the winner is the
    lowest index scoring within 1e-12 of the step maximum."""
    p = X_tr.shape[1]
    chosen, path = [], []
    for step in range(k):
        results = {}
        for j in range(p):
            if j in chosen:
                continue
            cols = sorted(chosen + [j])
            model = fit(X_tr[:, cols], y_tr, spawn_seed(seed, step, j))
            results[j] = score(model, X_va[:, cols], y_va)
        top = max(results.values())
        best = min(j for j, s in results.items() if s >= top - 1e-12)
        chosen.append(best)
        path.append((best, results[best]))
    return chosen, path


def gini_impurity(labels) -> float:
    labels = list(labels)
    n = len(labels)
    return 1.0 - sum((labels.count(c) / n) ** 2 for c in set(labels))
