import numpy as np
import pytest
from hypothesis import strategies as st

from pipriv.dist import FiniteJoint, joint_from_matrix

BSC = [[0.4, 0.1], [0.1, 0.4]]
EPS_GRID = np.round(np.arange(1, 31) * 0.1, 10)


def bsc():
    return joint_from_matrix([0, 1], [0, 1], BSC)


def independent(n_s=3, n_y=4, seed=0):
    rng = np.random.default_rng(seed)
    ps, py = rng.dirichlet(np.ones(n_s)), rng.dirichlet(np.ones(n_y))
    return joint_from_matrix(range(n_s), range(n_y), np.outer(ps, py))


def make_corpus(n=1000, seed=2024):
    """Seeded random joints with |S|, |Y| in 2..8.

    Concentrations vary so that both flat and spiky joints appear, and about
    one in five joints gets exact zero cells (rows stay positive).
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        n_s, n_y = rng.integers(2, 9, size=2)
        conc = float(rng.choice([0.2, 0.5, 1.0, 3.0]))
        m = rng.gamma(conc, size=(n_s, n_y)) + 1e-300
        if rng.random() < 0.2:
            mask = rng.random((n_s, n_y)) < 0.3
            for i in range(n_s):
                if mask[i].all():
                    mask[i, rng.integers(n_y)] = False
            m[mask] = 0.0
        out.append(FiniteJoint(tuple(range(n_s)), tuple(range(n_y)), m / m.sum()))
    return out


@pytest.fixture(scope="session")
def corpus():
    return make_corpus()


@st.composite
def joints(draw, max_dim=6, allow_zeros=True, positive_marginals=False):
    n_s = draw(st.integers(1 if not positive_marginals else 2, max_dim))
    n_y = draw(st.integers(1 if not positive_marginals else 2, max_dim))
    lo = 0.0 if allow_zeros else 1e-3
    cells = draw(st.lists(st.floats(lo, 1.0), min_size=n_s * n_y, max_size=n_s * n_y))
    m = np.asarray(cells).reshape(n_s, n_y)
    # keep every row (and optionally every column) strictly positive
    m[np.arange(n_s), np.arange(n_s) % n_y] += 1e-2
    if positive_marginals:
        m[np.arange(n_y) % n_s, np.arange(n_y)] += 1e-2
    return FiniteJoint(tuple(range(n_s)), tuple(range(n_y)), m / m.sum())


eps_values = st.floats(0.01, 4.0)


ACCEPTANCE_LINES: list = []


@pytest.fixture
def record(capsys):
    """Log one pass/fail line for an acceptance criterion."""

    def _record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
