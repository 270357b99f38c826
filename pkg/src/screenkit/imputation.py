"""k-nearest-neighbour imputation under a missingness-aware Euclidean distance.

The distance between two rows uses only coordinates observed in both and
rescales by the observed fraction::

    d(a, b) = sqrt(D / d_obs * sum_{j observed in both} (a_j - b_j)^2)

Rows sharing no observed coordinate are at infinite distance and never act as
donors for each other.  Note that the rescaling breaks the triangle
inequality.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError
from .survey_data import SurveyTable

WEIGHTINGS = ("uniform", "inverse_distance")


@dataclass(frozen=True)
class ImputeConfig:
    k: int = 5
    weighting: str = "uniform"
    distance_scale: str = "observed_fraction_rescaled"

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.weighting not in WEIGHTINGS:
            raise ConfigError(f"unknown weighting {self.weighting!r}")
        if self.distance_scale != "observed_fraction_rescaled":
            raise ConfigError(f"unknown distance_scale {self.distance_scale!r}")


@dataclass
class ImputeReport:
    imputed_cells: dict[str, int] = field(default_factory=dict)
    donor_shortfalls: dict[str, int] = field(default_factory=dict)
    runtime_s: float = 0.0

    def to_dict(self, include_runtime: bool = True) -> dict:
        d = {"imputed_cells": dict(self.imputed_cells), "donor_shortfalls": dict(self.donor_shortfalls)}
        if include_runtime:
            d["runtime_s"] = self.runtime_s
        return d


def masked_distance(a, b, mask_a, mask_b) -> float:
    """Distance between two rows; masks are True where a cell is *missing*.

    Returns ``inf`` when no coordinate is observed in both rows.
    """
    a, b = np.asarray(a, float), np.asarray(b, float)
    both = ~np.asarray(mask_a, bool) & ~np.asarray(mask_b, bool)
    d_obs = int(both.sum())
    if d_obs == 0:
        return float("inf")
    diff = a[both] - b[both]
    return float(np.sqrt(len(a) / d_obs * np.sum(diff * diff)))


def pairwise_masked_distances(X: np.ndarray, M: np.ndarray, Y: np.ndarray, N: np.ndarray) -> np.ndarray:
    """All rows of X against all rows of Y (masks True = missing)."""
    A, B = np.where(M, 0.0, X), np.where(N, 0.0, Y)
    oa, ob = (~M).astype(float), (~N).astype(float)
    ss = (A * A) @ ob.T + oa @ (B * B).T - 2.0 * (A @ B.T)
    np.maximum(ss, 0.0, out=ss)
    d_obs = oa @ ob.T
    with np.errstate(divide="ignore", invalid="ignore"):
        dist = np.sqrt(X.shape[1] / d_obs * ss)
    dist[d_obs == 0] = np.inf
    return dist


def _nearest_lists(dist: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """(row, column) pairs of the k smallest finite entries of each row,
    ordered by row then column.  At the k-th distance lower columns win."""
    finite = np.isfinite(dist)
    if dist.shape[1] <= k:
        return np.nonzero(finite)
    kth = np.partition(dist, k - 1, axis=1)[:, k - 1]
    rr, cc = np.nonzero((dist <= kth[:, None]) & finite)
    d = dist[rr, cc]
    tied = d == kth[rr]
    below = np.bincount(rr, weights=~tied, minlength=len(dist)).astype(int)
    # rank of each tied entry within its row
    cum = np.cumsum(tied)
    first = np.searchsorted(rr, np.arange(len(dist)))
    before = np.where(first > 0, cum[np.maximum(first - 1, 0)], 0)
    rank = cum - before[rr]
    keep = ~tied | (rank <= k - below[rr])
    return rr[keep], cc[keep]


def impute_knn(
    table: SurveyTable,
    config: ImputeConfig = ImputeConfig(),
    donor_rows: np.ndarray | None = None,
    report: ImputeReport | None = None,
    block_size: int = 256,
) -> SurveyTable:
    """Fill every missing cell from the k nearest donor rows observing it.

    ``donor_rows`` (local positions) restricts which rows may donate, e.g. the
    training partition.  A row never donates to itself.  Each cell depends
    only on the input table, so the result does not depend on ``block_size``.
    """
    t0 = time.perf_counter()
    X, M = table.values, table.missing_mask
    n, p = X.shape
    report = report if report is not None else ImputeReport()
    if not M.any():
        report.imputed_cells = {name: 0 for name in table.columns}
        report.runtime_s = time.perf_counter() - t0
        return table
    donors = np.arange(n) if donor_rows is None else np.unique(np.asarray(donor_rows, dtype=np.int64))
    if config.k >= len(donors):
        raise ConfigError(f"k={config.k} must be smaller than the donor count {len(donors)}")
    observed = (~M[donors]).sum(axis=0)
    for j, name in enumerate(table.columns):
        if observed[j] < config.k:
            raise DataError(f"column {name!r} has {observed[j]} observed donor values, fewer than k={config.k}")
    empty = np.flatnonzero(M.all(axis=1))
    if len(empty):
        raise DataError(f"row {int(table.row_ids[empty[0]])} has every cell missing")

    out = X.copy()
    DX, DM = X[donors], M[donors]
    donor_pos = np.full(n, -1)
    donor_pos[donors] = np.arange(len(donors))
    shortfall = np.zeros(p, dtype=int)
    targets = np.flatnonzero(M.any(axis=1))
    for b in range(0, len(targets), block_size):
        rows = targets[b:b + block_size]
        dist = pairwise_masked_distances(X[rows], M[rows], DX, DM)
        own = donor_pos[rows]
        dist[np.flatnonzero(own >= 0), own[own >= 0]] = np.inf
        for j in np.flatnonzero(M[rows].any(axis=0)):
            r = np.flatnonzero(M[rows, j])
            cand = np.where(DM[None, :, j], np.inf, dist[r])
            rr, cc = _nearest_lists(cand, config.k)
            counts = np.bincount(rr, minlength=len(r))
            if (counts == 0).any():
                bad = rows[r[np.flatnonzero(counts == 0)[0]]]
                raise DataError(f"no donor shares an observed coordinate with row {int(table.row_ids[bad])} "
                                f"for column {table.columns[j]!r}")
            shortfall[j] += int((counts < config.k).sum())
            vals = DX[cc, j]
            if config.weighting == "uniform":
                filled = np.bincount(rr, weights=vals, minlength=len(r)) / counts
            else:
                # exact matches take over; otherwise weight by 1/d
                d = cand[rr, cc]
                zero = d == 0
                n_zero = np.bincount(rr, weights=zero, minlength=len(r))
                zero_sum = np.bincount(rr, weights=np.where(zero, vals, 0.0), minlength=len(r))
                w = np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, d))
                w_vals = np.bincount(rr, weights=w * vals, minlength=len(r))
                w_sum = np.bincount(rr, weights=w, minlength=len(r))
                with np.errstate(divide="ignore", invalid="ignore"):
                    filled = np.where(n_zero > 0, zero_sum / n_zero, w_vals / w_sum)
            out[rows[r], j] = filled
    report.imputed_cells = {name: int(M[:, j].sum()) for j, name in enumerate(table.columns)}
    report.donor_shortfalls = {name: int(shortfall[j]) for j, name in enumerate(table.columns) if shortfall[j]}
    report.runtime_s = time.perf_counter() - t0
    return table.with_values(out, np.zeros_like(M))


def mean_impute(table: SurveyTable, donor_rows: np.ndarray | None = None) -> SurveyTable:
    """Column-mean baseline."""
    X, M = table.values, table.missing_mask
    rows = np.arange(table.n_rows) if donor_rows is None else np.asarray(donor_rows)
    means = np.nanmean(np.where(M[rows], np.nan, X[rows]), axis=0)
    return table.with_values(np.where(M, means[None, :], X), np.zeros_like(M))
