"""Exact error covariances of a tuning run and correlation comparison metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assimilation import IterativeState, Method, extended_covariance
from .spd import airm_distance, correlation_from_covariance, pairwise_distances, symmetrize


@dataclass(frozen=True)
class ExactTrace:
    """True background error covariance and background/observation cross-covariance.

    ``history_B[n]`` and ``history_cross[n]`` hold iterate ``n``; the last
    entries equal ``B`` and ``cross_cov``.
    """

    B: np.ndarray
    cross_cov: np.ndarray
    history_B: tuple = field(default=(), repr=False)
    history_cross: tuple = field(default=(), repr=False)

    @classmethod
    def start(cls, B_E, obs_dim: int) -> "ExactTrace":
        B_E = np.atleast_2d(np.asarray(B_E, dtype=float))
        cross = np.zeros((B_E.shape[0], obs_dim))
        return cls(B_E, cross, (B_E,), (cross,))

    @property
    def n(self) -> int:
        return len(self.history_B) - 1


def exact_step(trace: ExactTrace, gain, R, H, method: Method) -> ExactTrace:
    """Propagate the exact covariances through the operator a scheme applied.

    ``gain`` is the Kalman gain ``K`` for 3D-Var, naive and CUTE and the
    extended-space operator ``G`` for PUB. ``R`` is the true observation
    error covariance.
    """
    method = Method(method)
    gain = np.atleast_2d(np.asarray(gain, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    H = np.atleast_2d(np.asarray(H, dtype=float))
    n, m = trace.cross_cov.shape
    B, C = trace.B, trace.cross_cov
    if method is Method.PUB:
        if gain.shape != (n, n + m):
            raise ValueError(f"PUB operator has shape {gain.shape}, expected {(n, n + m)}")
        c_ext = extended_covariance(B, C, R)
        B_next = gain @ c_ext @ gain.T
        C_next = gain @ np.vstack([C, R])
    else:
        if gain.shape != (n, m):
            raise ValueError(f"gain has shape {gain.shape}, expected {(n, m)}")
        M = np.eye(n) - gain @ H
        mck = M @ C @ gain.T
        B_next = M @ B @ M.T + mck + mck.T + gain @ R @ gain.T
        C_next = M @ C + gain @ R
    B_next = symmetrize(B_next)
    return ExactTrace(
        B_next,
        C_next,
        trace.history_B + (B_next,),
        trace.history_cross + (C_next,),
    )


def track_exact(states: list[IterativeState], B_E, R, H) -> ExactTrace:
    """Run :func:`exact_step` along the operators recorded in ``states``."""
    trace = ExactTrace.start(B_E, np.atleast_2d(R).shape[0])
    for s in states:
        trace = exact_step(trace, s.gain, R, H, s.method)
    return trace


@dataclass(frozen=True)
class CalibratedCurve:
    """Mean correlation against pair distance."""

    distances: np.ndarray
    values: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.distances) <= 0):
            raise ValueError("distances must be strictly increasing")
        if np.any(self.counts < 1):
            raise ValueError("every distance needs at least one pair")


def calibrate_correlation(cov, coords, field_selector=None, max_distance: float = 10.0,
                          tol: float = 1e-9) -> CalibratedCurve:
    """Average the correlation of all point pairs sharing a distance.

    ``field_selector`` (slice or index array) picks the block of ``cov``
    whose points are ``coords``. Distances equal within ``tol`` are grouped
    and only ``0 < r < max_distance`` is kept.
    """
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if field_selector is not None:
        cov = cov[np.ix_(np.arange(cov.shape[0])[field_selector],
                         np.arange(cov.shape[0])[field_selector])]
    coords = np.asarray(coords, dtype=float)
    if cov.shape[0] != coords.shape[0]:
        raise ValueError(f"{coords.shape[0]} points for a {cov.shape[0]}-dim covariance")
    _, cor = correlation_from_covariance(cov)
    iu = np.triu_indices(cov.shape[0], k=1)
    r = pairwise_distances(coords)[iu]
    c = cor[iu]
    keep = (r > tol) & (r < max_distance - tol)
    r, c = r[keep], c[keep]
    order = np.argsort(r, kind="stable")
    r, c = r[order], c[order]
    if r.size == 0:
        return CalibratedCurve(np.empty(0), np.empty(0), np.empty(0, dtype=int))
    starts = np.flatnonzero(np.concatenate([[True], np.diff(r) > tol]))
    counts = np.diff(np.append(starts, r.size))
    sums = np.add.reduceat(c, starts)
    return CalibratedCurve(r[starts], sums / counts, counts)


def correlation_mismatch(a: CalibratedCurve, b: CalibratedCurve, tol: float = 1e-9) -> float:
    """L2 distance between two curves defined on the same distances."""
    if a.distances.shape != b.distances.shape or np.any(np.abs(a.distances - b.distances) > tol):
        raise ValueError("curves have different distance supports")
    return float(np.sqrt(np.sum((a.values - b.values) ** 2)))


def airm_between_correlations(assumed, exact) -> float:
    """AIRM distance between the correlation parts of two covariances."""
    _, cor_a = correlation_from_covariance(assumed)
    _, cor_e = correlation_from_covariance(exact)
    return airm_distance(cor_a, cor_e)
