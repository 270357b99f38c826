"""Seed derivation.

Every randomized unit of work (a forest tree, an SFS candidate, a
permutation repeat, a workflow cell) gets its own generator derived from
``(root_seed, *keys)`` through :class:`numpy.random.SeedSequence` spawn keys.
Results therefore never depend on the order in which units are scheduled.
"""

from __future__ import annotations

import numpy as np


def derive_seed(root: int, *keys: int) -> int:
    """Deterministic 32-bit seed for the unit addressed by ``keys``."""
    ss = np.random.SeedSequence(int(root), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def derive_rng(root: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(root), spawn_key=tuple(int(k) for k in keys)))
