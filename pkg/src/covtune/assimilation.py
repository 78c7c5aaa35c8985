"""BLUE / 3D-Var analysis and the iterative covariance tuning schemes.

Three iterative schemes reuse one observation vector several times:

* ``naive`` re-applies 3D-Var and takes the assumed posterior as the next
  background covariance, ignoring the background/observation correlation
  the loop creates.
* ``cute`` tracks that cross-covariance and adds its terms to the assumed
  posterior, then rescales the trace.
* ``pub`` performs the BLUE in the stacked (background, observation) space
  where the cross-covariance sits in the extended covariance, and updates
  the background block only.

Every step is linear in the data: the next background is
``state_weight @ x_b + obs_weight @ y``. The weights depend only on the
covariances, which lets Monte-Carlo drivers compute them once.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .spd import NotPositiveDefiniteError, spd_factorize, symmetrize


class DegeneratePosteriorError(ArithmeticError):
    """Raised when an assumed posterior has a non-positive trace."""


class Method(str, enum.Enum):
    THREEDVAR = "3dvar"
    NAIVE = "naive"
    CUTE = "cute"
    PUB = "pub"


def _as_matrix(a, name):
    a = np.asarray(a, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def _as_vector(a, name):
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if a.ndim != 1:
        raise ValueError(f"{name} must be a vector, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class AssimilationProblem:
    """Background ``xb``, observations ``y``, assumed ``B``, ``R`` and linear ``H``."""

    xb: np.ndarray
    y: np.ndarray
    B: np.ndarray
    R: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        xb = _as_vector(self.xb, "xb")
        y = _as_vector(self.y, "y")
        if y.size == 0:
            raise ValueError("observation vector is empty")
        B = _as_matrix(self.B, "B")
        R = _as_matrix(self.R, "R")
        H = _as_matrix(self.H, "H")
        n, m = xb.size, y.size
        if B.shape != (n, n):
            raise ValueError(f"B has shape {B.shape}, expected {(n, n)}")
        if R.shape != (m, m):
            raise ValueError(f"R has shape {R.shape}, expected {(m, m)}")
        if H.shape != (m, n):
            raise ValueError(f"H has shape {H.shape}, expected {(m, n)}")
        for name, value in (("xb", xb), ("y", y), ("B", B), ("R", R), ("H", H)):
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class TuningConfig:
    method: Method = Method.CUTE
    alpha: float = 0.0
    max_iters: int = 10
    innovation_rel_tol: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.innovation_rel_tol is not None and self.innovation_rel_tol < 0:
            raise ValueError("innovation_rel_tol must be non-negative")


@dataclass(frozen=True)
class IterativeState:
    """Iterate ``n`` of a tuning loop.

    ``posterior`` is the assumed analysis covariance before trace
    rescaling. ``gain`` is the operator applied by the step that produced
    this state (``K`` for naive/CUTE, the extended ``G`` for PUB), and
    ``state_weight``/``obs_weight`` are its split on ``(x_b, y)``.
    """

    n: int
    xb: np.ndarray
    B: np.ndarray
    cross_cov: np.ndarray
    innovation_norm: float
    method: Method | None = None
    posterior: np.ndarray | None = field(default=None, repr=False)
    gain: np.ndarray | None = field(default=None, repr=False)
    state_weight: np.ndarray | None = field(default=None, repr=False)
    obs_weight: np.ndarray | None = field(default=None, repr=False)


def innovation_norm(y, H, x) -> float:
    return float(np.linalg.norm(y - H @ x))


def initial_state(p: AssimilationProblem) -> IterativeState:
    return IterativeState(
        n=0,
        xb=p.xb,
        B=symmetrize(p.B),
        cross_cov=np.zeros((p.xb.size, p.y.size)),
        innovation_norm=innovation_norm(p.y, p.H, p.xb),
    )


def kalman_gain(B, R, H) -> np.ndarray:
    """K = B H^T (H B H^T + R)^-1 by a Cholesky solve."""
    B = _as_matrix(B, "B")
    R = _as_matrix(R, "R")
    H = _as_matrix(H, "H")
    hb = H @ B
    s = symmetrize(hb @ H.T + R)
    return spd_factorize(s, "innovation covariance").solve(hb).T


def blue_analysis(p: AssimilationProblem) -> tuple[np.ndarray, np.ndarray]:
    """One-shot BLUE: analysis state and assumed analysis covariance."""
    K = kalman_gain(p.B, p.R, p.H)
    xa = p.xb + K @ (p.y - p.H @ p.xb)
    A = symmetrize((np.eye(p.xb.size) - K @ p.H) @ p.B)
    return xa, A


def variational_cost(p: AssimilationProblem, x) -> float:
    """0.5 ||x - xb||^2_{B^-1} + 0.5 ||y - Hx||^2_{R^-1}."""
    x = _as_vector(x, "x")
    db = x - p.xb
    do = p.y - p.H @ x
    jb = db @ spd_factorize(p.B, "B").solve(db)
    jo = do @ spd_factorize(p.R, "R").solve(do)
    return 0.5 * float(jb + jo)


def posterior_exact_oneshot(B_E, B_A, R, H) -> np.ndarray:
    """Exact analysis covariance when the gain is built from ``B_A``."""
    B_E = _as_matrix(B_E, "B_E")
    R = _as_matrix(R, "R")
    H = _as_matrix(H, "H")
    K = kalman_gain(B_A, R, H)
    M = np.eye(B_E.shape[0]) - K @ H
    return symmetrize(M @ B_E @ M.T + K @ R @ K.T)


def rescale_trace(B_prev, A, alpha: float) -> np.ndarray:
    """Scale ``A`` so its trace is the alpha-blend of both traces."""
    tr_a = float(np.trace(A))
    if not tr_a > 0:
        raise DegeneratePosteriorError(f"assumed posterior has trace {tr_a}")
    target = (1.0 - alpha) * float(np.trace(B_prev)) + alpha * tr_a
    return symmetrize((target / tr_a) * A)


def naive_step(s: IterativeState, y, R, H) -> IterativeState:
    K = kalman_gain(s.B, R, H)
    M = np.eye(s.xb.size) - K @ H
    xa = s.xb + K @ (y - H @ s.xb)
    A = symmetrize(M @ s.B)
    return IterativeState(
        n=s.n + 1,
        xb=xa,
        B=A,
        cross_cov=s.cross_cov,
        innovation_norm=innovation_norm(y, H, xa),
        method=Method.NAIVE,
        posterior=A,
        gain=K,
        state_weight=M,
        obs_weight=K,
    )


def cute_step(s: IterativeState, y, R, H, alpha: float) -> IterativeState:
    K = kalman_gain(s.B, R, H)
    M = np.eye(s.xb.size) - K @ H
    xa = s.xb + K @ (y - H @ s.xb)
    cross_next = M @ s.cross_cov + K @ R
    mck = M @ s.cross_cov @ K.T
    A = symmetrize(M @ s.B + mck + mck.T)
    return IterativeState(
        n=s.n + 1,
        xb=xa,
        B=rescale_trace(s.B, A, alpha),
        cross_cov=cross_next,
        innovation_norm=innovation_norm(y, H, xa),
        method=Method.CUTE,
        posterior=A,
        gain=K,
        state_weight=M,
        obs_weight=K,
    )


def extended_covariance(B, cross_cov, R) -> np.ndarray:
    """Block matrix [[B, C], [C^T, R]] of the stacked (background, observation) errors."""
    return np.block([[B, cross_cov], [cross_cov.T, R]])


def pub_step(s: IterativeState, y, R, H, alpha: float) -> IterativeState:
    n = s.xb.size
    R = _as_matrix(R, "R")
    H = _as_matrix(H, "H")
    C = symmetrize(extended_covariance(s.B, s.cross_cov, R))
    try:
        c_fac = spd_factorize(C, f"extended covariance at iteration {s.n}")
        h_ext = np.vstack([np.eye(n), H])
        w = c_fac.solve(h_ext)  # C^-1 H~
        info = symmetrize(h_ext.T @ w)
        A = spd_factorize(info, f"extended information matrix at iteration {s.n}").inverse()
    except NotPositiveDefiniteError as exc:
        raise NotPositiveDefiniteError(f"PUB iteration {s.n}: {exc}") from exc
    G = A @ w.T
    z = np.concatenate([s.xb, y])
    xa = G @ z
    cross_next = G @ np.vstack([s.cross_cov, R])
    return IterativeState(
        n=s.n + 1,
        xb=xa,
        B=rescale_trace(s.B, A, alpha),
        cross_cov=cross_next,
        innovation_norm=innovation_norm(y, H, xa),
        method=Method.PUB,
        posterior=A,
        gain=G,
        state_weight=G[:, :n],
        obs_weight=G[:, n:],
    )


def tuning_step(s: IterativeState, y, R, H, method: Method, alpha: float) -> IterativeState:
    method = Method(method)
    if method in (Method.NAIVE, Method.THREEDVAR):
        out = naive_step(s, y, R, H)
        if method is Method.THREEDVAR:
            out = _with_method(out, Method.THREEDVAR)
        return out
    if method is Method.CUTE:
        return cute_step(s, y, R, H, alpha)
    return pub_step(s, y, R, H, alpha)


def _with_method(s: IterativeState, method: Method) -> IterativeState:
    return IterativeState(**{**s.__dict__, "method": method})


def run_iterative(p: AssimilationProblem, cfg: TuningConfig) -> list[IterativeState]:
    """Run the configured scheme; returns the iterates ``n = 1 .. N``.

    3D-Var is a single BLUE step. With ``innovation_rel_tol`` set the loop
    stops once the relative change of the innovation norm falls below it.
    """
    s = initial_state(p)
    n_iter = 1 if cfg.method is Method.THREEDVAR else cfg.max_iters
    states = []
    for _ in range(n_iter):
        nxt = tuning_step(s, p.y, p.R, p.H, cfg.method, cfg.alpha)
        states.append(nxt)
        tol = cfg.innovation_rel_tol
        if tol is not None and s.innovation_norm > 0:
            if abs(nxt.innovation_norm - s.innovation_norm) / s.innovation_norm < tol:
                break
        s = nxt
    return states


def apply_schedule(states, xb, y) -> np.ndarray:
    """Replay the linear maps recorded in ``states`` on new data.

    Returns the backgrounds ``x_b,1 .. x_b,N`` stacked row-wise; they equal
    the analyses ``x_a,0 .. x_a,N-1``.
    """
    x = np.asarray(xb, dtype=float)
    out = np.empty((len(states), x.size))
    for i, s in enumerate(states):
        x = s.state_weight @ x + s.obs_weight @ y
        out[i] = x
    return out

