import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import TWO_STATE_ROWS, random_sources, stationary_by_solve
from shiftent.measures import (
    BlockDistribution,
    BudgetExceeded,
    TailPolicy,
    TailTruncation,
    bernoulli_from_weights,
    block_marginal,
    factor_of,
    geometric_weight,
    higher_block,
    index_word,
    kernel_from_marginals,
    markov_from_kernel,
    random_markov,
    sample_path,
    transfer_matrix,
    truncate_countable,
    word_index,
)


def test_word_index_roundtrip():
    for word in itertools.product(range(3), repeat=4):
        assert index_word(word_index(word, 3), 3, 4) == word
    # earliest symbol most significant
    assert word_index((1, 0), 2) == 2


class TestBernoulli:
    def test_dyadic_weights(self, dyadic):
        assert dyadic.alphabet_size == 4
        p = block_marginal(dyadic, 2).probs
        assert p[word_index((0, 3), 4)] == pytest.approx(1 / 16, abs=1e-15)

    def test_point_mass(self):
        m = bernoulli_from_weights([1.0])
        for n in (1, 3, 5):
            assert block_marginal(m, n).probs.tolist() == [1.0]

    def test_uniform_pair(self):
        m = bernoulli_from_weights([0.5, 0.5])
        np.testing.assert_allclose(block_marginal(m, 2).probs, np.full(4, 0.25), atol=1e-15)
        np.testing.assert_allclose(block_marginal(m, 3).probs, np.full(8, 0.125), atol=1e-15)

    @pytest.mark.parametrize("bad", [[0.5, -0.1, 0.6], [0.5, 0.4], [0.3, 0.3, 0.3]])
    def test_rejects_bad_weights(self, bad):
        with pytest.raises(ValueError):
            bernoulli_from_weights(bad)


class TestMarkov:
    def test_doubly_stochastic(self):
        m = markov_from_kernel(1, [[0.5, 0.5], [0.5, 0.5]])
        np.testing.assert_allclose(m.stationary, [0.5, 0.5], atol=1e-15)
        b = bernoulli_from_weights([0.5, 0.5])
        for n in range(1, 5):
            np.testing.assert_allclose(block_marginal(m, n).probs, block_marginal(b, n).probs, atol=1e-15)
        assert not m.reducible

    def test_identity_kernel_flagged(self):
        m = markov_from_kernel(1, [[1.0, 0.0], [0.0, 1.0]])
        assert m.reducible
        np.testing.assert_allclose(m.stationary, [0.5, 0.5], atol=1e-15)

    def test_periodic_chain_reaches_fixed_point(self):
        m = markov_from_kernel(1, [[0.0, 1.0], [1.0, 0.0]])
        assert not m.reducible
        np.testing.assert_allclose(m.stationary, [0.5, 0.5], atol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_stationary_matches_dense_solve(self, seed):
        m = random_markov(3, 1, seed)
        oracle = stationary_by_solve(m.kernel)
        np.testing.assert_allclose(m.stationary, oracle, atol=1e-12)
        assert np.max(np.abs(m.stationary @ m.kernel - m.stationary)) < 1e-10

    @pytest.mark.parametrize("order", [2, 3])
    def test_higher_order_stationary(self, order):
        m = random_markov(2, order, 11 + order)
        oracle = stationary_by_solve(transfer_matrix(m))
        np.testing.assert_allclose(m.stationary, oracle, atol=1e-12)

    def test_two_state_pair_probability(self, two_state):
        np.testing.assert_allclose(two_state.stationary, [2 / 3, 1 / 3], atol=1e-14)
        assert block_marginal(two_state, 2).prob((0, 0)) == pytest.approx(0.6, abs=1e-14)

    def test_rejects_bad_row(self):
        with pytest.raises(ValueError):
            markov_from_kernel(1, [[0.5, 0.6], [0.5, 0.5]])
        with pytest.raises(ValueError):
            markov_from_kernel(1, [[0.5, 0.5]])

    def test_rejects_wrong_stationary(self):
        with pytest.raises(ValueError):
            markov_from_kernel(1, TWO_STATE_ROWS, stationary=[0.5, 0.5])

    def test_kernel_roundtrip(self):
        for m in random_sources(12, seed=3):
            kernel, mass = kernel_from_marginals(m, m.order)
            live = mass > 0
            np.testing.assert_allclose(kernel[live], m.kernel[live], atol=1e-10)


class TestFactor:
    def test_mass_addition(self):
        m = factor_of(bernoulli_from_weights([0.5, 0.25, 0.25]), [0, 1, 1])
        np.testing.assert_allclose(block_marginal(m, 1).probs, [0.5, 0.5], atol=1e-15)

    def test_matches_coded_enumeration(self):
        src = random_markov(3, 2, 4)
        coding = np.array([0, 1, 1])
        f = factor_of(src, coding)
        for n in range(1, 6):
            words = np.array(list(itertools.product(range(3), repeat=n)))
            coded = np.zeros(len(words), dtype=int)
            for j in range(n):
                coded = coded * 2 + coding[words[:, j]]
            oracle = np.bincount(coded, weights=block_marginal(src, n).probs, minlength=2**n)
            np.testing.assert_allclose(block_marginal(f, n).probs, oracle, atol=1e-14)

    def test_coding_must_be_surjective_and_total(self):
        b = bernoulli_from_weights([0.5, 0.5])
        with pytest.raises(ValueError):
            factor_of(b, [0, 2])
        with pytest.raises(ValueError):
            factor_of(b, [0])


def _consistency_gap(m, n):
    d = block_marginal(m, n)
    prev = block_marginal(m, n - 1).probs
    return max(np.max(np.abs(d.drop_last() - prev)), np.max(np.abs(d.drop_first() - prev)))


@settings(max_examples=40, deadline=None)
@given(K=st.integers(2, 4), order=st.integers(1, 3), seed=st.integers(0, 2**32 - 1),
       n=st.integers(2, 5), lump=st.booleans())
def test_kolmogorov_consistency(K, order, seed, n, lump):
    m = random_markov(K, order, seed)
    if lump:
        m = factor_of(m, np.minimum(np.arange(K), K - 2))
    assert _consistency_gap(m, n) <= 1e-12


def test_block_distribution_validates():
    with pytest.raises(ValueError):
        BlockDistribution(2, 2, [0.5, 0.5, 0.1, 0.0])
    with pytest.raises(ValueError):
        BlockDistribution(2, 2, [0.5, 0.5])


def test_budget_guard(monkeypatch):
    m = bernoulli_from_weights([0.5, 0.5])
    with pytest.raises(BudgetExceeded):
        block_marginal(m, 11, budget=1024)
    monkeypatch.setenv("SHIFTENT_ENUM_BUDGET", "64")
    with pytest.raises(BudgetExceeded):
        block_marginal(m, 7)
    block_marginal(m, 6)


def test_higher_block_is_order_one_presentation():
    src = random_markov(2, 2, 8)
    hb = higher_block(src, 3)
    assert hb.order == 1 and hb.alphabet_size == 8
    # the last symbol of the block process reproduces the source
    f = factor_of(hb, np.arange(8) % 2)
    for n in range(1, 5):
        np.testing.assert_allclose(block_marginal(f, n).probs, block_marginal(src, n).probs, atol=1e-13)


class TestSampling:
    def test_point_mass(self):
        assert sample_path(bernoulli_from_weights([1.0]), 5, 0).tolist() == [0] * 5

    def test_deterministic(self, two_state):
        a = sample_path(two_state, 1000, 42)
        b = sample_path(two_state, 1000, 42)
        assert np.array_equal(a, b)

    def test_fair_coin_frequencies(self):
        y = sample_path(bernoulli_from_weights([0.5, 0.5]), 10**6, 7)
        freq = np.bincount(y, minlength=2) / y.size
        # 3 sigma for p = 1/2 at L = 1e6 is 0.0015
        assert np.all(np.abs(freq - 0.5) < 0.005)

    def test_markov_pair_frequencies(self, two_state):
        L = 200_000
        y = sample_path(two_state, L, 3)
        pairs = np.bincount(y[:-1] * 2 + y[1:], minlength=4) / (L - 1)
        p = block_marginal(two_state, 2).probs
        # correlated samples: allow a generous multiple of the i.i.d. sigma
        sigma = np.sqrt(p * (1 - p) / L)
        assert np.all(np.abs(pairs - p) < 10 * sigma)

    def test_shift_invariance(self):
        m = random_markov(3, 2, 21)
        L = 100_000
        y = sample_path(m, L, 5)
        w = (0, 1)
        hits = (y[:-2] == w[0]) & (y[1:-1] == w[1])
        at0 = hits[0::2].mean()
        at1 = hits[1::2].mean()
        p = block_marginal(m, 2).prob(w)
        assert abs(at0 - at1) < 3 * 4 * math.sqrt(p * (1 - p) / (L / 2))


class TestTruncation:
    def test_merge_tail(self):
        np.testing.assert_allclose(
            truncate_countable(geometric_weight, TailTruncation(3)), [0.5, 0.25, 0.25], atol=1e-15
        )

    def test_renormalize(self):
        np.testing.assert_allclose(
            truncate_countable(geometric_weight, TailTruncation(3, TailPolicy.RENORMALIZE)),
            [4 / 7, 2 / 7, 1 / 7], atol=1e-15,
        )

    @pytest.mark.parametrize("policy", list(TailPolicy))
    def test_single_symbol(self, policy):
        assert truncate_countable(geometric_weight, TailTruncation(1, policy)).tolist() == [1.0]

    def test_merge_tail_needs_closed_form(self):
        with pytest.raises(ValueError):
            truncate_countable(lambda k: 1 / (k * (k + 1)), TailTruncation(4))
        w = truncate_countable(lambda k: 1 / (k * (k + 1)), TailTruncation(4), tail=lambda k: 1 / k)
        np.testing.assert_allclose(w, [1 / 2, 1 / 6, 1 / 12, 1 / 4], atol=1e-15)
