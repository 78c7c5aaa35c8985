"""Random binomial selection observation operator.

Each observation sums ``n_j ~ Binomial(state_dim, p)`` state entries drawn
uniformly with replacement, so ``H[j, k]`` counts how often entry ``k`` was
picked for row ``j``. Rows with ``n_j = 0`` are kept.

Generation uses numpy's PCG64 bit generator seeded through ``SeedSequence``
so the same seed gives the same matrix on every platform.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class BinomialSelectionSpec:
    state_dim: int = 200
    obs_dim: int = 100
    p: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError(f"selection probability must be in (0, 1), got {self.p}")
        if self.state_dim < 1 or self.obs_dim < 1:
            raise ValueError("dimensions must be positive")


def generate_h(spec: BinomialSelectionSpec) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed)))
    H = np.zeros((spec.obs_dim, spec.state_dim))
    for j in range(spec.obs_dim):
        n_j = rng.binomial(spec.state_dim, spec.p)
        picks = rng.integers(0, spec.state_dim, size=n_j)
        np.add.at(H[j], picks, 1.0)
    return H


def regular_h(state_dim: int = 200, obs_dim: int = 100) -> np.ndarray:
    """Evenly spaced one-hot rows; a structured alternative to the random operator."""
    H = np.zeros((obs_dim, state_dim))
    idx = np.linspace(0, state_dim - 1, obs_dim).round().astype(int)
    H[np.arange(obs_dim), idx] = 1.0
    return H


def apply(H, x) -> np.ndarray:
    H = np.atleast_2d(np.asarray(H, dtype=float))
    x = np.asarray(x, dtype=float)
    if x.shape[0] != H.shape[1]:
        raise ValueError(f"operator of shape {H.shape} cannot act on a vector of size {x.shape[0]}")
    return H @ x


def row_count_histogram(H) -> dict[int, int]:
    """Number of rows per selection count ``n_j`` (row sum)."""
    sums = np.rint(np.asarray(H).sum(axis=1)).astype(int)
    return dict(sorted(Counter(sums.tolist()).items()))


def save_h(H, path) -> Path:
    """CSV with one line per observation and ``state_dim`` integer counts."""
    path = Path(path)
    np.savetxt(path, np.asarray(H), fmt="%d", delimiter=",")
    return path


def load_h(path) -> np.ndarray:
    H = np.loadtxt(Path(path), delimiter=",", ndmin=2)
    if np.any(H < 0) or np.any(H != np.rint(H)):
        raise ValueError(f"{path}: operator entries must be non-negative integers")
    return H
