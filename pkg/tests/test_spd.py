import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covtune.spd import (
    CholeskyFactor,
    CorrelationKernel,
    DegenerateVarianceError,
    KernelKind,
    NotPositiveDefiniteError,
    airm_distance,
    build_correlation_matrix,
    check_covariance,
    correlation_from_covariance,
    covariance_from_correlation,
    grid_coords,
    kernel_eval,
    sample_gaussian,
    spd_factorize,
    spd_log,
)

from conftest import random_spd, spd_matrices

KINDS = list(KernelKind)


def mp_kernel(kind, L, r):
    r, L = mpmath.mpf(r), mpmath.mpf(L)
    if kind is KernelKind.EXPONENTIAL:
        return mpmath.exp(-r / L)
    if kind is KernelKind.BALGOVIND:
        return (1 + r / L) * mpmath.exp(-r / L)
    return mpmath.exp(-r**2 / (2 * L**2))


@pytest.mark.parametrize("kind", KINDS)
def test_kernel_is_one_at_zero(kind):
    assert kernel_eval(CorrelationKernel(kind, 3.0), 0.0) == 1.0


@pytest.mark.parametrize("kind,L,r,expected", [
    ("exponential", 3.0, 3.0, 0.36787944117144233),
    ("balgovind", 2.0, 2.0, 0.7357588823428847),
    ("gaussian", 1.0, 1.0, 0.6065306597126334),
])
def test_kernel_closed_forms(kind, L, r, expected):
    k = CorrelationKernel(kind, L)
    mp = float(mp_kernel(k.kind, L, r))
    assert kernel_eval(k, r) == pytest.approx(mp, rel=1e-15)
    assert kernel_eval(k, r) == pytest.approx(expected, rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(KINDS), st.floats(0.1, 20.0), st.floats(0.0, 50.0))
def test_kernel_matches_high_precision(kind, L, r):
    got = kernel_eval(CorrelationKernel(kind, L), r)
    want = float(mp_kernel(kind, L, r))
    assert got == pytest.approx(want, rel=1e-13, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(KINDS), st.floats(0.1, 10.0))
def test_kernel_non_increasing_in_unit_interval(kind, L):
    r = np.linspace(0.0, 40.0, 801)
    vals = kernel_eval(CorrelationKernel(kind, L), r)
    assert np.all(np.diff(vals) <= 0)
    assert np.all((vals > 0) | (r > 0)) and np.all(vals <= 1)


def test_kernel_rejects_bad_inputs():
    with pytest.raises(ValueError):
        CorrelationKernel("exponential", 0.0)
    with pytest.raises(ValueError):
        CorrelationKernel("exponential", -1.0)
    with pytest.raises(ValueError):
        kernel_eval(CorrelationKernel("gaussian", 1.0), -0.5)
    with pytest.raises(ValueError):
        CorrelationKernel("matern52", 1.0)


def test_correlation_matrix_single_point():
    c = build_correlation_matrix(CorrelationKernel("balgovind", 2.0), [[0.0, 0.0]])
    assert c.shape == (1, 1) and c[0, 0] == 1.0


def test_correlation_matrix_two_points():
    c = build_correlation_matrix(CorrelationKernel("exponential", 1.0), [[0, 0], [0, 1]])
    assert c[0, 1] == pytest.approx(math.exp(-1), rel=1e-15)
    assert c[1, 0] == c[0, 1]


@pytest.mark.parametrize("kind", KINDS)
def test_collinear_points_give_toeplitz(kind):
    c = build_correlation_matrix(CorrelationKernel(kind, 1.5), [[0, 0], [1, 0], [2, 0], [3, 0]])
    for k in range(4):
        diag = np.diag(c, k)
        assert np.allclose(diag, diag[0], rtol=0, atol=1e-15)
    assert np.array_equal(np.diag(c), np.ones(4))


@pytest.mark.parametrize("kind,L", [("exponential", 3.0), ("balgovind", 2.0), ("gaussian", 1.0), ("gaussian", 3.0)])
@pytest.mark.parametrize("n", [5, 10, 15])
def test_grid_correlation_is_semidefinite(kind, L, n):
    c = build_correlation_matrix(CorrelationKernel(kind, L), grid_coords(n, n))
    assert np.linalg.eigvalsh(c)[0] >= -1e-8


def test_grid_coords_row_major():
    c = grid_coords(2, 3)
    assert c.tolist() == [[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [1, 2]]


def test_covariance_from_correlation_examples():
    c = random_spd(np.random.default_rng(1), 4)
    _, cor = correlation_from_covariance(c)
    assert np.allclose(covariance_from_correlation(np.ones(4), cor), cor, rtol=0, atol=0)
    assert np.array_equal(covariance_from_correlation([4.0, 9.0], np.eye(2)), np.diag([4.0, 9.0]))
    cov = covariance_from_correlation([4.0, 9.0], np.array([[1.0, 0.5], [0.5, 1.0]]))
    assert cov[0, 1] == pytest.approx(3.0, rel=1e-15)
    with pytest.raises(ValueError):
        covariance_from_correlation([1.0, 2.0, 3.0], np.eye(2))


def test_correlation_from_covariance_examples():
    d, cor = correlation_from_covariance(np.diag([4.0, 9.0]))
    assert d.tolist() == [4.0, 9.0] and np.array_equal(cor, np.eye(2))
    d, cor = correlation_from_covariance([[2.5]])
    assert d.tolist() == [2.5] and cor.tolist() == [[1.0]]
    with pytest.raises(DegenerateVarianceError):
        correlation_from_covariance(np.diag([1.0, 0.0]))


@settings(max_examples=100, deadline=None)
@given(spd_matrices(max_dim=12))
def test_correlation_round_trip(c):
    d, cor = correlation_from_covariance(c)
    back = covariance_from_correlation(d, cor)
    assert np.allclose(back, c, rtol=1e-12, atol=1e-12 * np.abs(c).max())


def test_check_covariance():
    check_covariance(np.eye(3))
    with pytest.raises(ValueError):
        check_covariance(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(NotPositiveDefiniteError):
        check_covariance(np.diag([1.0, -1.0, 1.0]))
    with pytest.raises(NotPositiveDefiniteError):
        check_covariance(np.zeros((2, 2)))


def test_factorize_examples():
    f = spd_factorize(np.eye(3))
    assert np.array_equal(f.lower, np.eye(3)) and f.jitter == 0.0
    assert spd_factorize([[4.0]]).lower.tolist() == [[2.0]]


@settings(max_examples=100, deadline=None)
@given(spd_matrices(max_dim=20, cond=1e6))
def test_factor_reconstructs(c):
    f = spd_factorize(c)
    assert f.jitter == 0.0
    assert np.allclose(f.lower @ f.lower.T, c, rtol=0, atol=1e-10 * np.abs(c).max())


def test_factorize_applies_and_records_jitter():
    # rank-one, so plain Cholesky fails and a small jitter is needed
    v = np.array([1.0, 2.0, 3.0])
    c = np.outer(v, v)
    f = spd_factorize(c)
    assert f.jitter > 0
    assert f.jitter <= 1e-14 * np.trace(c) / 3 * 1000
    assert np.allclose(f.lower @ f.lower.T, c + f.jitter * np.eye(3), rtol=0, atol=1e-12)


def test_factorize_rejects_indefinite():
    with pytest.raises(NotPositiveDefiniteError):
        spd_factorize(np.diag([1.0, -1.0]))
    with pytest.raises(NotPositiveDefiniteError):
        spd_factorize(np.diag([-1.0, -2.0]))


def test_cholesky_solve_and_inverse(rng):
    c = random_spd(rng, 6)
    f = spd_factorize(c)
    b = rng.standard_normal(6)
    assert np.allclose(c @ f.solve(b), b, atol=1e-10)
    assert np.allclose(f.inverse() @ c, np.eye(6), atol=1e-9)
    assert isinstance(f, CholeskyFactor) and f.dim == 6


def test_sample_zero_covariance_returns_mean(rng):
    mean = np.array([1.0, -2.0, 3.5])
    assert np.array_equal(sample_gaussian(mean, np.zeros((3, 3)), rng), mean)


def test_sample_is_deterministic_per_stream():
    c = random_spd(np.random.default_rng(0), 5)
    a = sample_gaussian(np.zeros(5), c, np.random.default_rng(7))
    b = sample_gaussian(np.zeros(5), c, np.random.default_rng(7))
    assert np.array_equal(a, b)


def test_sample_statistics():
    rng = np.random.default_rng(11)
    mean = np.array([1.0, -1.0])
    cov = np.diag([1.0, 4.0])
    x = sample_gaussian(mean, cov, rng, size=100_000)
    se = np.sqrt(np.diag(cov) / x.shape[0])
    assert np.all(np.abs(x.mean(axis=0) - mean) < 4 * se)
    emp = np.cov(x.T)
    assert np.allclose(np.diag(emp), np.diag(cov), rtol=0.05)
    assert abs(emp[0, 1]) < 0.05


def test_sample_batch_matches_single_draws():
    c = random_spd(np.random.default_rng(3), 4)
    f = spd_factorize(c)
    batch = sample_gaussian(np.zeros(4), f, np.random.default_rng(5), size=3)
    g = np.random.default_rng(5)
    z = g.standard_normal((3, 4))
    assert np.allclose(batch, z @ f.lower.T, rtol=0, atol=1e-15)


def test_spd_log_of_diagonal():
    assert np.allclose(spd_log(np.diag([1.0, math.e, math.e**2])), np.diag([0.0, 1.0, 2.0]), atol=1e-14)


def test_airm_examples():
    assert airm_distance(np.eye(2), 2 * np.eye(2)) == pytest.approx(math.sqrt(2) * math.log(2), rel=1e-12)
    assert airm_distance(np.eye(2), 2 * np.eye(2)) == pytest.approx(0.980258, abs=1e-6)
    c = random_spd(np.random.default_rng(2), 5)
    assert airm_distance(c, c) == pytest.approx(0.0, abs=1e-12)


def test_airm_rejects_non_pd():
    with pytest.raises(NotPositiveDefiniteError):
        airm_distance(np.eye(2), np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        airm_distance(np.eye(2), np.eye(3))


@settings(max_examples=100, deadline=None)
@given(spd_matrices(max_dim=10), st.integers(0, 2**32 - 1))
def test_airm_symmetric(x, seed):
    y = random_spd(np.random.default_rng(seed), x.shape[0])
    assert airm_distance(x, y) == pytest.approx(airm_distance(y, x), rel=1e-9, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(spd_matrices(max_dim=10, cond=1e2), st.integers(0, 2**32 - 1))
def test_airm_affine_invariant(x, seed):
    rng = np.random.default_rng(seed)
    dim = x.shape[0]
    y = random_spd(rng, dim, 1e2)
    m = rng.standard_normal((dim, dim)) + 3 * np.eye(dim)
    d0 = airm_distance(x, y)
    d1 = airm_distance(m.T @ x @ m, m.T @ y @ m)
    assert abs(d1 - d0) <= 1e-8 * max(1.0, d0)


@settings(max_examples=100, deadline=None)
@given(spd_matrices(max_dim=10), st.floats(1e-3, 1e3))
def test_airm_scaling(x, c):
    want = math.sqrt(x.shape[0]) * abs(math.log(c))
    assert airm_distance(x, c * x) == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_airm_of_grid_correlations_matches_block_value():
    # two identical diagonal blocks double the squared distance
    coords = grid_coords(10, 10)
    e = build_correlation_matrix(CorrelationKernel("balgovind", 2.0), coords)
    a = build_correlation_matrix(CorrelationKernel("exponential", 3.0), coords)
    from scipy.linalg import block_diag
    single = airm_distance(a, e)
    double = airm_distance(block_diag(a, a), block_diag(e, e))
    assert double == pytest.approx(math.sqrt(2) * single, rel=1e-10)
