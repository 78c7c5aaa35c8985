"""Correlation kernels, covariance construction and SPD numerics.

Covariance matrices are plain symmetric ``numpy`` arrays. The helpers here
build them from isotropic kernels, split them into variances and
correlations, factorize them with a bounded jitter policy, sample from the
corresponding Gaussian, and measure the affine-invariant Riemannian distance
between two of them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import linalg

SYMMETRY_RTOL = 1e-12
EIGEN_RTOL = 1e-10
LOG_FLOOR = 1e-14
JITTER_START = 1e-14
JITTER_ESCALATIONS = 3


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a matrix cannot be treated as (semi-)definite."""


class DegenerateVarianceError(ValueError):
    """Raised when a covariance has a non-positive variance on its diagonal."""


class KernelKind(str, enum.Enum):
    EXPONENTIAL = "exponential"
    BALGOVIND = "balgovind"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class CorrelationKernel:
    """Isotropic correlation function with a length scale in grid units.

    ``exponential`` is exp(-r/L), ``balgovind`` (Matern 3/2) is
    (1 + r/L) exp(-r/L) and ``gaussian`` is exp(-r^2 / 2L^2).
    """

    kind: KernelKind
    length_scale: float

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))
        if not self.length_scale > 0:
            raise ValueError(f"length scale must be positive, got {self.length_scale}")

    def __call__(self, r):
        return kernel_eval(self, r)


def kernel_eval(kernel: CorrelationKernel, r):
    """Evaluate ``kernel`` at distance(s) ``r``. Scalars in, float out."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("distances must be non-negative")
    s = r_arr / kernel.length_scale
    if kernel.kind is KernelKind.EXPONENTIAL:
        out = np.exp(-s)
    elif kernel.kind is KernelKind.BALGOVIND:
        out = (1.0 + s) * np.exp(-s)
    else:
        out = np.exp(-0.5 * s * s)
    return float(out) if out.ndim == 0 else out


def grid_coords(nrows: int, ncols: int) -> np.ndarray:
    """Row-major (row, col) coordinates of a ``nrows`` x ``ncols`` grid."""
    rows, cols = np.divmod(np.arange(nrows * ncols), ncols)
    return np.column_stack([rows, cols]).astype(float)


def pairwise_distances(coords) -> np.ndarray:
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def build_correlation_matrix(kernel: CorrelationKernel, coords) -> np.ndarray:
    """Correlation matrix of ``kernel`` over the Euclidean distances of ``coords``."""
    coords = np.asarray(coords, dtype=float)
    if coords.size == 0:
        raise ValueError("at least one point is required")
    cor = np.asarray(kernel_eval(kernel, pairwise_distances(coords)), dtype=float)
    np.fill_diagonal(cor, 1.0)
    return cor


def block_diagonal(*blocks) -> np.ndarray:
    return linalg.block_diag(*blocks)


def symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def check_covariance(cov, name: str = "covariance") -> np.ndarray:
    """Validate symmetry, trace and the eigenvalue floor; return the array."""
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError(f"{name} must be square, got shape {cov.shape}")
    if not np.all(np.isfinite(cov)):
        raise ValueError(f"{name} has non-finite entries")
    scale = np.max(np.abs(cov)) if cov.size else 0.0
    if np.max(np.abs(cov - cov.T), initial=0.0) > SYMMETRY_RTOL * max(scale, 1e-300):
        raise ValueError(f"{name} is not symmetric")
    tr = np.trace(cov)
    if not tr > 0:
        raise NotPositiveDefiniteError(f"{name} has non-positive trace {tr}")
    lam_min = np.linalg.eigvalsh(cov)[0]
    if lam_min < -EIGEN_RTOL * tr:
        raise NotPositiveDefiniteError(f"{name} is indefinite (min eigenvalue {lam_min:.3e})")
    return cov


def covariance_from_correlation(variances, cor) -> np.ndarray:
    """Return D^1/2 Cor D^1/2 for the diagonal of variances ``D``."""
    variances = np.asarray(variances, dtype=float)
    cor = np.asarray(cor, dtype=float)
    if cor.shape != (variances.size, variances.size):
        raise ValueError(f"dimension mismatch: {variances.size} variances, correlation {cor.shape}")
    if np.any(variances <= 0):
        raise DegenerateVarianceError("variances must be positive")
    sd = np.sqrt(variances)
    return sd[:, None] * cor * sd[None, :]


def correlation_from_covariance(cov) -> tuple[np.ndarray, np.ndarray]:
    """Split ``cov`` into its variances and its unit-diagonal correlation."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    variances = np.diag(cov).copy()
    if np.any(variances <= 0):
        bad = int(np.argmin(variances))
        raise DegenerateVarianceError(f"variance {variances[bad]:.3e} at index {bad}")
    sd = np.sqrt(variances)
    cor = cov / sd[:, None] / sd[None, :]
    np.fill_diagonal(cor, 1.0)
    return variances, cor


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower factor with ``lower @ lower.T == cov + jitter * I``."""

    lower: np.ndarray
    jitter: float = 0.0

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def solve(self, b):
        return linalg.cho_solve((self.lower, True), b, check_finite=False)

    def inverse(self) -> np.ndarray:
        return symmetrize(self.solve(np.eye(self.dim)))


def spd_factorize(cov, what: str = "matrix") -> CholeskyFactor:
    """Cholesky factorization with a bounded diagonal jitter.

    The first attempt uses no jitter. On failure the jitter starts at
    1e-14 * trace / dim and grows by a factor ten, at most three times.
    """
    cov = np.asarray(cov, dtype=float)
    dim = cov.shape[0]
    tr = float(np.trace(cov))
    if not np.isfinite(tr) or tr <= 0:
        raise NotPositiveDefiniteError(f"{what} has non-positive trace {tr}")
    eye = np.eye(dim)
    jitter = 0.0
    for attempt in range(JITTER_ESCALATIONS + 2):
        if attempt == 1:
            jitter = JITTER_START * tr / dim
        elif attempt > 1:
            jitter *= 10.0
        try:
            lower = np.linalg.cholesky(cov + jitter * eye if jitter else cov)
        except np.linalg.LinAlgError:
            continue
        return CholeskyFactor(lower, jitter)
    raise NotPositiveDefiniteError(f"{what} is not positive definite (jitter up to {jitter:.3e})")


def sample_gaussian(mean, cov, rng: np.random.Generator, size: int | None = None):
    """Draw from N(mean, cov) as ``mean + F z``.

    ``cov`` may be a matrix or a pre-computed :class:`CholeskyFactor`. With
    ``size`` the draws are stacked along the first axis.
    """
    mean = np.asarray(mean, dtype=float)
    if isinstance(cov, CholeskyFactor):
        lower = cov.lower
    else:
        cov = np.asarray(cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"mean of size {mean.size} does not match covariance {cov.shape}")
        if not np.any(cov):
            z = rng.standard_normal(mean.size if size is None else (size, mean.size))
            return mean + 0.0 * z
        lower = spd_factorize(cov, "sampling covariance").lower
    if lower.shape[0] != mean.size:
        raise ValueError(f"mean of size {mean.size} does not match factor {lower.shape}")
    if size is None:
        return mean + lower @ rng.standard_normal(mean.size)
    return mean + rng.standard_normal((size, mean.size)) @ lower.T


def _checked_eigh(m: np.ndarray, what: str):
    w, v = np.linalg.eigh(symmetrize(m))
    if w[-1] <= 0 or w[0] < -EIGEN_RTOL * abs(np.sum(w)):
        raise NotPositiveDefiniteError(f"{what} is not positive definite (eigenvalues {w[0]:.3e}..{w[-1]:.3e})")
    return np.maximum(w, LOG_FLOOR * w[-1]), v


def spd_log(m) -> np.ndarray:
    """Matrix logarithm through the symmetric eigendecomposition."""
    w, v = _checked_eigh(np.asarray(m, dtype=float), "matrix")
    return (v * np.log(w)) @ v.T


def airm_distance(x, y) -> float:
    """Affine-invariant Riemannian distance ``||log(X^-1/2 Y X^-1/2)||_F``.

    Eigenvalues below 1e-14 of the largest one are floored before the
    inverse square root and the logarithm so nearly singular iterates stay
    measurable.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    wx, vx = _checked_eigh(x, "first argument")
    _checked_eigh(y, "second argument")
    x_isqrt = (vx / np.sqrt(wx)) @ vx.T
    lam, _ = _checked_eigh(x_isqrt @ y @ x_isqrt, "whitened matrix")
    return float(np.sqrt(np.sum(np.log(lam) ** 2)))
