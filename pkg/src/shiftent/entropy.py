"""Shannon, block and conditional entropies in nats.

Factor measures (hidden Markov processes) have no closed-form rate, so their
rates are reported as a bracket ``lower <= h <= upper``:

* upper: ``H(Y_{n+1} | Y_1..Y_n)``
* lower: ``H(Y_{n+1} | Y_1..Y_n, S_1)`` with ``S_1`` the hidden source state

Both are computed by a forward recursion over positive-probability factor
words, so only words that can actually occur are ever stored.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import sparse

from .measures import (
    INPUT_TOL,
    Bernoulli,
    Factor,
    Markov,
    StationaryMeasure,
    block_marginal,
    check_budget,
    transfer_matrix,
)

LN3 = math.log(3.0)
HYPOTHESIS_SLACK = 1e-15


def _plogp_sum(p: np.ndarray) -> float:
    p = p[p > 0]
    return max(0.0, -math.fsum((p * np.log(p)).tolist()))


def shannon(p) -> float:
    """``-sum p_i ln p_i`` with ``0 ln 0 = 0``, exactly rounded summation."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValueError("probability vector has negative entries")
    total = math.fsum(p.ravel().tolist())
    if abs(total - 1.0) > INPUT_TOL:
        raise ValueError(f"probability vector sums to {total!r}, not 1")
    return _plogp_sum(p.ravel())


# ---------------------------------------------------------------------------
# Hidden-chain forward recursion for factor measures
# ---------------------------------------------------------------------------

class HiddenChain(NamedTuple):
    transition: np.ndarray  # (S, S), dense or sparse
    initial: np.ndarray  # (S,) stationary
    emit: np.ndarray  # (S,) observed symbol in each state
    n_symbols: int


def hidden_chain(m: StationaryMeasure) -> HiddenChain:
    """Order-1 hidden chain whose emitted process is ``m``."""
    if isinstance(m, Bernoulli):
        K = m.alphabet_size
        P = np.broadcast_to(m.weights, (K, K)).copy()
        return HiddenChain(P, np.array(m.weights), np.arange(K), K)
    if isinstance(m, Markov):
        # the support of the stationary vector is closed under the dynamics
        K = m.alphabet_size
        live = np.flatnonzero(m.stationary > 0)
        P = transfer_matrix(m)[live][:, live].tocsr()
        return HiddenChain(P, np.array(m.stationary[live]), live % K, K)
    inner = hidden_chain(m.source)
    return HiddenChain(inner.transition, inner.initial, m.coding[inner.emit], m.alphabet_size)


def _forward(chain: HiddenChain, n: int, condition_on_start: bool, budget: int | None):
    """Yield ``(words, rows)`` for word lengths ``1..n``.

    ``rows`` is a sparse matrix; row ``j`` is the unnormalized filter over
    hidden states for the ``j``-th surviving (start state, word) pair, so
    its sum is that pair's probability.
    """
    S = chain.initial.size
    Q = chain.n_symbols
    P = sparse.csr_matrix(chain.transition)
    masks = [sparse.diags((chain.emit == y).astype(float)) for y in range(Q)]
    if condition_on_start:
        starts = np.flatnonzero(chain.initial > 0)
        alpha = sparse.csr_matrix(
            (chain.initial[starts], (np.arange(starts.size), starts)), shape=(starts.size, S)
        )
    else:
        alpha = sparse.csr_matrix(chain.initial[None, :])
    words = np.zeros(alpha.shape[0], dtype=np.int64)
    for length in range(1, n + 1):
        beta = alpha if length == 1 else alpha @ P
        new_rows, new_words = [], []
        for y in range(Q):
            cand = (beta @ masks[y]).tocsr()
            keep = np.flatnonzero(np.asarray(cand.sum(axis=1)).ravel() > 0)
            new_rows.append(cand[keep])
            new_words.append(words[keep] * Q + y)
        alpha = sparse.vstack(new_rows, format="csr")
        words = np.concatenate(new_words)
        check_budget(alpha.nnz, f"factor forward recursion at length {length}", budget)
        yield words, alpha


def _row_masses(alpha) -> np.ndarray:
    return np.asarray(alpha.sum(axis=1)).ravel()


def factor_word_masses(m: Factor, n: int, budget: int | None = None):
    """Indices and probabilities of all positive-probability ``n``-words of ``m``."""
    chain = hidden_chain(m)
    for words, alpha in _forward(chain, n, False, budget):
        pass
    return words, _row_masses(alpha)


def _joint_entropies(chain: HiddenChain, n: int, condition_on_start: bool, budget) -> list[float]:
    return [
        _plogp_sum(_row_masses(alpha))
        for _, alpha in _forward(chain, n, condition_on_start, budget)
    ]


class Bracket(NamedTuple):
    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= value <= self.upper + tol


def factor_bracket(m: StationaryMeasure, n: int, budget: int | None = None) -> Bracket:
    """Certified bracket on the entropy rate of ``m`` from ``n`` past symbols."""
    if n < 0:
        raise ValueError("memory must be nonnegative")
    chain = hidden_chain(m)
    plain = _joint_entropies(chain, n + 1, False, budget)
    hidden = _joint_entropies(chain, n + 1, True, budget)
    upper = plain[n] - (plain[n - 1] if n > 0 else 0.0)
    start_entropy = _plogp_sum(chain.initial)
    lower = hidden[n] - (hidden[n - 1] if n > 0 else start_entropy)
    lower, upper = max(0.0, lower), max(0.0, upper)
    return Bracket(min(lower, upper), upper)


# ---------------------------------------------------------------------------
# Block entropies and rates
# ---------------------------------------------------------------------------

def block_entropy(m: StationaryMeasure, n: int, budget: int | None = None) -> float:
    """Entropy of the length-``n`` block distribution (``0`` for ``n == 0``)."""
    if n == 0:
        return 0.0
    if isinstance(m, Factor):
        check_budget(m.alphabet_size**n, f"block marginal of length {n}", budget)
        _, masses = factor_word_masses(m, n, budget)
        return _plogp_sum(masses)
    return _plogp_sum(block_marginal(m, n, budget).probs)


def block_entropies(m: StationaryMeasure, n_max: int, budget: int | None = None) -> np.ndarray:
    """``[H_0, H_1, ..., H_{n_max}]``."""
    if isinstance(m, Factor):
        check_budget(m.alphabet_size**n_max, f"block marginal of length {n_max}", budget)
        hs = _joint_entropies(hidden_chain(m), n_max, False, budget)
        return np.array([0.0] + hs)
    return np.array([block_entropy(m, n, budget) for n in range(n_max + 1)])


def conditional_block_entropy(m: StationaryMeasure, n: int, budget: int | None = None) -> float:
    """Entropy of the next symbol given ``n`` past symbols, ``H_{n+1} - H_n``."""
    if n < 0:
        raise ValueError("memory must be nonnegative")
    return max(0.0, block_entropy(m, n + 1, budget) - block_entropy(m, n, budget))


def markov_rate(m: Markov) -> float:
    """Stationary-weighted entropy of the kernel rows."""
    k = m.kernel
    with np.errstate(divide="ignore", invalid="ignore"):
        rows = -np.where(k > 0, k * np.log(k), 0.0).sum(axis=1)
    return max(0.0, math.fsum((m.stationary * rows).tolist()))


@dataclass(frozen=True)
class RateEstimate:
    value: float
    exact: bool
    lower: float
    upper: float


def entropy_rate(m: StationaryMeasure, max_n: int = 8, budget: int | None = None) -> RateEstimate:
    """Entropy rate; exact for Bernoulli and Markov, bracketed for factors.

    For a factor measure ``value`` is the upper bound at memory ``max_n``.
    """
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    if isinstance(m, Bernoulli):
        h = shannon(m.weights)
        return RateEstimate(h, True, h, h)
    if isinstance(m, Markov):
        h = markov_rate(m)
        return RateEstimate(h, True, h, h)
    b = factor_bracket(m, max_n, budget)
    return RateEstimate(b.upper, False, b.lower, b.upper)


# ---------------------------------------------------------------------------
# Perturbation inequalities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LemmaReport:
    c: float
    hypothesis_holds: bool
    H_p: float
    H_q: float
    bound: float
    conclusion_holds: bool
    slack: float


def lemma_bound_check(p, q, c: float) -> LemmaReport:
    """Compare ``H(p)`` with ``(1 + c) H(q) + c ln 3``.

    The hypothesis is ``|p_i - q_i| <= c q_i`` for every atom.  The bound is
    always evaluated; it is only asserted when the hypothesis holds.
    """
    if not 0.0 < c < 1.0 / 3.0:
        raise ValueError(f"c must lie in (0, 1/3), got {c!r}")
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("p and q must have the same length")
    hypothesis = bool(np.all(np.abs(p - q) <= c * q + HYPOTHESIS_SLACK))
    H_p, H_q = shannon(p), shannon(q)
    bound = (1.0 + c) * H_q + c * LN3
    slack = bound - H_p
    report = LemmaReport(c, hypothesis, H_p, H_q, bound, slack >= -1e-12, slack)
    if hypothesis:
        assert report.conclusion_holds, f"entropy perturbation bound violated: {report}"
    return report


def ratio_flip_check(a: float, b: float, eps: float) -> bool:
    """Whether ``|a - b| <= eps b`` implies ``|a - b| <= 2 eps a`` here.

    Returns ``True`` when the hypothesis fails (nothing to check).
    """
    if not 0.0 < eps <= 0.5:
        raise ValueError("eps must lie in (0, 1/2]")
    d = abs(a - b)
    if d > eps * b:
        return True
    return d <= 2.0 * eps * a


def lemma_fuzz(trials: int, seed, max_atoms: int = 64) -> list[LemmaReport]:
    """Random ``(q, c, p)`` triples satisfying the perturbation hypothesis.

    ``q`` is Dirichlet over up to ``max_atoms`` atoms (some atoms zeroed),
    ``p`` multiplies each ``q_i`` by a factor in ``[1 - c, 1 + c]`` and is
    renormalized; draws whose renormalization breaks the hypothesis are
    discarded.  Each accepted triple is checked by :func:`lemma_bound_check`,
    which raises on a violation.
    """
    rng = np.random.default_rng(seed)
    reports = []
    attempts = 0
    while len(reports) < trials:
        attempts += 1
        if attempts > 100 * trials:
            raise RuntimeError("fuzzer acceptance rate collapsed")
        n = int(rng.integers(1, max_atoms + 1))
        q = rng.dirichlet(np.full(n, rng.uniform(0.05, 2.0)))
        if n > 1 and rng.random() < 0.3:
            q[rng.random(n) < 0.3] = 0.0
            if q.sum() == 0:
                continue
            q /= q.sum()
        c = float(rng.uniform(0.0, 1.0 / 3.0))
        if c == 0.0:
            continue
        p = q * rng.uniform(1.0 - c, 1.0 + c, size=n)
        p /= p.sum()
        if not np.all(np.abs(p - q) <= c * q + HYPOTHESIS_SLACK):
            continue
        reports.append(lemma_bound_check(p, q, c))
    return reports
