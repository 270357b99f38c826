"""Two independent binary heads (autism, ADHD) and the induced four-way rule.

Class order of the joint output is ``(None, AutismOnly, AdhdOnly, Both)``,
matching :data:`screenkit.survey_data.CLASS4_NAMES`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

THRESHOLD = 0.5


@dataclass(eq=False)
class MultilabelModel:
    asd_head: Any
    adhd_head: Any

    n_classes = 4

    @property
    def n_features(self) -> int:
        return self.asd_head.n_features

    def head_proba(self, X: np.ndarray) -> np.ndarray:
        """(n, 2) positive-class probabilities: columns autism, ADHD."""
        return np.column_stack([self.asd_head.predict_proba(X)[:, 1], self.adhd_head.predict_proba(X)[:, 1]])

    def head_decisions(self, X: np.ndarray) -> np.ndarray:
        # a probability of exactly 0.5 counts as negative
        return self.head_proba(X) > THRESHOLD

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return joint_proba(self.head_proba(X))

    def predict_class4(self, X: np.ndarray) -> np.ndarray:
        d = self.head_decisions(X)
        return d[:, 0].astype(np.int8) + 2 * d[:, 1].astype(np.int8)


def joint_proba(heads: np.ndarray) -> np.ndarray:
    """Outer product of the per-head (1-p, p) marginals."""
    pa, pd = heads[:, 0], heads[:, 1]
    return np.column_stack([(1 - pa) * (1 - pd), pa * (1 - pd), (1 - pa) * pd, pa * pd])


def fit_heads(X: np.ndarray, labels: np.ndarray, fit_head) -> MultilabelModel:
    """``labels`` is (n, 2) boolean (autism, ADHD); ``fit_head(X, y, head_index)``
    trains one binary head."""
    labels = np.asarray(labels)
    if labels.ndim != 2 or labels.shape[1] != 2:
        raise ValueError("multilabel targets must have shape (n, 2)")
    return MultilabelModel(
        fit_head(X, labels[:, 0].astype(int), 0),
        fit_head(X, labels[:, 1].astype(int), 1),
    )
