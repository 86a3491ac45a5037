import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftent.entropy import block_entropy, factor_bracket, markov_rate, shannon
from shiftent.measures import (
    TailTruncation,
    bernoulli_from_weights,
    block_marginal,
    geometric_weight,
    markov_from_kernel,
    random_markov,
    truncate_countable,
)
from shiftent.suspension import (
    TruncatedPartition,
    abramov_rate,
    build_suspension,
    factor_entropy_bracket,
    factor_process,
    generator_entropy_sweep,
    q_schedule,
    slow_ceiling,
)

LN2 = math.log(2)


def geometric_base(K=4):
    return bernoulli_from_weights(truncate_countable(geometric_weight, TailTruncation(K)))


def test_flat_ceiling_is_base():
    base = random_markov(3, 1, 2)
    s = build_suspension(base, (0, 0, 0))
    assert s.symbols == ((0, 0), (1, 0), (2, 0))
    np.testing.assert_allclose(s.measure.kernel, base.kernel, atol=1e-15)
    assert markov_rate(s.measure) == pytest.approx(markov_rate(base), abs=1e-14)


def test_coin_tower():
    s = build_suspension(bernoulli_from_weights([0.5, 0.5]), (1, 0))
    assert s.symbols == ((0, 0), (0, 1), (1, 0))
    np.testing.assert_allclose(s.measure.stationary, [1 / 3] * 3, atol=1e-15)
    assert s.mean_height == 0.5
    assert abramov_rate(s) == pytest.approx(2 / 3 * LN2, abs=1e-15)
    b = factor_bracket(s.measure, 4)
    assert b.contains(2 / 3 * LN2, tol=1e-12)


def test_point_mass_base():
    s = build_suspension(bernoulli_from_weights([1.0]), (3,))
    assert markov_rate(s.measure) == 0.0
    assert abramov_rate(s) == 0.0


def test_tower_dynamics():
    base = markov_from_kernel(1, [[0.7, 0.3], [0.4, 0.6]])
    s = build_suspension(base, (2, 1))
    k = s.measure.kernel
    i = s.symbol_index
    assert k[i(0, 0), i(0, 1)] == 1.0 and k[i(0, 1), i(0, 2)] == 1.0
    assert k[i(0, 2), i(0, 0)] == 0.7 and k[i(0, 2), i(1, 0)] == 0.3
    assert k[i(1, 1), i(0, 0)] == 0.4
    assert math.fsum(s.measure.stationary) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_abramov_markov_base(seed):
    base = random_markov(3, 1, seed)
    f = np.random.default_rng(seed).integers(0, 4, size=3)
    s = build_suspension(base, f)
    b = factor_bracket(s.measure, 8)
    assert b.contains(abramov_rate(s), tol=1e-10)
    assert b.width <= 0.02
    assert markov_rate(s.measure) == pytest.approx(abramov_rate(s), abs=1e-12)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        build_suspension(bernoulli_from_weights([0.5, 0.5]), (1,))
    with pytest.raises(ValueError):
        build_suspension(bernoulli_from_weights([0.5, 0.5]), (1, -1))
    with pytest.raises(TypeError):
        build_suspension(random_markov(2, 2, 0), (1, 1))


class TestTruncatedPartition:
    def test_coding(self):
        assert TruncatedPartition(3).coding(5).tolist() == [0, 1, 2, 2, 2]
        assert TruncatedPartition(9).coding(4).tolist() == [0, 1, 2, 3]

    def test_identity(self):
        m = random_markov(3, 1, 5)
        f = factor_process(m, TruncatedPartition(3))
        for n in range(1, 4):
            assert block_entropy(f, n) == pytest.approx(block_entropy(m, n), abs=1e-13)

    def test_single_class(self):
        f = factor_process(geometric_base(), TruncatedPartition(1))
        assert block_entropy(f, 3) == pytest.approx(0.0, abs=1e-15)
        b = factor_entropy_bracket(geometric_base(), TruncatedPartition(1), 3)
        assert b.upper == pytest.approx(0.0, abs=1e-15)

    def test_dyadic_two_classes(self):
        f = factor_process(bernoulli_from_weights([0.5, 0.25, 0.125, 0.125]), TruncatedPartition(2))
        np.testing.assert_allclose(block_marginal(f, 1).probs, [0.5, 0.5], atol=1e-15)
        assert block_entropy(f, 1) == pytest.approx(LN2, abs=1e-15)

    def test_lumping_bracket_narrows(self):
        m = random_markov(3, 1, 12)
        widths = [factor_entropy_bracket(m, TruncatedPartition(2), n).width for n in range(1, 9)]
        assert all(b <= a + 1e-12 for a, b in zip(widths, widths[1:]))
        assert widths[-1] < widths[0]

    def test_identity_bracket_collapses(self):
        m = random_markov(3, 2, 12)
        b = factor_entropy_bracket(m, TruncatedPartition(5), 2)
        assert b.width == pytest.approx(0.0, abs=1e-12)
        assert b.upper == pytest.approx(markov_rate(m), abs=1e-12)


def test_block_entropy_monotone_in_q():
    s = build_suspension(geometric_base(), (0, 1, 2, 3))
    for n in range(1, 6):
        H = [block_entropy(factor_process(s.measure, TruncatedPartition(q)), n) for q in range(1, 12)]
        assert all(b >= a - 1e-10 for a, b in zip(H, H[1:]))


def test_partition_rate_reaches_full_rate():
    s = build_suspension(geometric_base(), (0, 1, 2, 3))
    full = factor_entropy_bracket(s.measure, TruncatedPartition(len(s.symbols)), 4)
    assert full.upper == pytest.approx(markov_rate(s.measure), abs=1e-12)
    # refining the partition cannot lower the rate, so each lower bracket
    # sits below every later upper bracket
    brackets = [factor_entropy_bracket(s.measure, TruncatedPartition(q), 6) for q in q_schedule(9)]
    assert all(a.lower <= b.upper + 1e-10 for a, b in zip(brackets, brackets[1:]))


def test_q_schedule():
    assert q_schedule(5) == [2, 3, 4, 5, 6]


def test_generator_entropy_grows():
    rows = generator_entropy_sweep(range(2, 16))
    heights = [r["mean_height"] for r in rows]
    logs = [r["weighted_log_sum"] for r in rows]
    ents = [r["tower_entropy"] for r in rows]
    assert max(heights) < 1.5 + 1e-12
    assert all(b > a for a, b in zip(logs[1:], logs[2:]))
    assert all(b > a for a, b in zip(ents, ents[1:]))
    assert slow_ceiling(6) == (2, 1, 0, 1, 1, 1)


@settings(max_examples=30, deadline=None)
@given(
    K=st.integers(1, 4),
    heights=st.lists(st.integers(0, 4), min_size=4, max_size=4),
    seed=st.integers(0, 2**32 - 1),
)
def test_abramov_property(K, heights, seed):
    base = random_markov(K, 1, seed) if K > 1 else bernoulli_from_weights([1.0])
    s = build_suspension(base, heights[:K])
    assert math.fsum(s.measure.stationary) == pytest.approx(1.0, abs=1e-12)
    assert markov_rate(s.measure) == pytest.approx(abramov_rate(s), abs=1e-12)
