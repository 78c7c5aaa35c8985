import numpy as np
import pytest
from hypothesis import strategies as st


def random_spd(rng, dim, cond=1e3):
    """SPD matrix with eigenvalues spread log-uniformly up to ``cond``."""
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    w = np.exp(rng.uniform(0.0, np.log(cond), dim))
    m = (q * w) @ q.T
    return 0.5 * (m + m.T)


@st.composite
def spd_matrices(draw, min_dim=2, max_dim=10, cond=1e3):
    dim = draw(st.integers(min_dim, max_dim))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_spd(np.random.default_rng(seed), dim, cond)


@st.composite
def assimilation_setups(draw, min_dim=2, max_dim=20):
    """(B, R, H) with an observation count between 1 and the state size."""
    n = draw(st.integers(min_dim, max_dim))
    m = draw(st.integers(1, n))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    B = random_spd(rng, n, 1e2)
    R = random_spd(rng, m, 1e2) * 0.1
    H = rng.standard_normal((m, n))
    return B, R, H


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# one line per acceptance criterion, repeated at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
