import numpy as np
import pytest

from shiftent.measures import bernoulli_from_weights, markov_from_kernel, random_markov

TWO_STATE_ROWS = [[0.9, 0.1], [0.2, 0.8]]


@pytest.fixture
def two_state():
    return markov_from_kernel(1, TWO_STATE_ROWS)


@pytest.fixture
def dyadic():
    return bernoulli_from_weights([0.5, 0.25, 0.125, 0.125])


def random_sources(count, seed=0, orders=(1, 2, 3), alphabets=(2, 3, 4)):
    """Random Markov sources with orders and alphabets cycling through the given sets."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        r = orders[i % len(orders)]
        K = alphabets[(i // len(orders)) % len(alphabets)]
        out.append(random_markov(K, r, rng, concentration=float(rng.uniform(0.3, 2.0))))
    return out


def stationary_by_solve(P):
    """Invariant vector of an irreducible stochastic matrix by a dense linear solve."""
    P = np.asarray(P.toarray() if hasattr(P, "toarray") else P)
    n = P.shape[0]
    A = np.vstack([P.T - np.eye(n), np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    return np.linalg.lstsq(A, b, rcond=None)[0]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
