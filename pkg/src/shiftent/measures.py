"""Finite-alphabet stationary shift measures and their block marginals.

Three kinds of measure are supported:

* :class:`Bernoulli` -- i.i.d. symbols with a fixed weight vector.
* :class:`Markov` -- an order-``r`` Markov measure given by a kernel over
  memory words of length ``r`` together with its stationary distribution on
  those words.
* :class:`Factor` -- the image of another measure under a symbol coding.

Words of length ``n`` over an alphabet of size ``K`` are indexed
lexicographically with the earliest symbol most significant, so the block
distribution of length ``n`` is a flat vector of size ``K**n``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Union

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

NORMALIZATION_TOL = 1e-12
FIXED_POINT_TOL = 1e-10
INPUT_TOL = 1e-9
DEFAULT_BUDGET = 2**24
BUDGET_ENV = "SHIFTENT_ENUM_BUDGET"


class BudgetExceeded(RuntimeError):
    """Raised when an enumeration would exceed the configured word budget."""

    def __init__(self, what: str, size: int, budget: int):
        super().__init__(
            f"enumeration budget exceeded for {what}: {size} > {budget} "
            f"(reduce the block length or alphabet, or raise ${BUDGET_ENV})"
        )
        self.size = size
        self.budget = budget


def enumeration_budget() -> int:
    value = os.environ.get(BUDGET_ENV)
    if value is None:
        return DEFAULT_BUDGET
    budget = int(value)
    if budget <= 0:
        raise ValueError(f"${BUDGET_ENV} must be positive, got {value!r}")
    return budget


def check_budget(size: int, what: str, budget: int | None = None) -> None:
    budget = enumeration_budget() if budget is None else budget
    if size > budget:
        raise BudgetExceeded(what, size, budget)


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_probability_vector(p: np.ndarray, tol: float, what: str) -> None:
    if p.ndim != 1 or p.size == 0:
        raise ValueError(f"{what} must be a non-empty 1-d vector")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{what} has non-finite entries")
    if np.any(p < 0):
        raise ValueError(f"{what} has negative entries")
    total = math.fsum(p.tolist())
    if abs(total - 1.0) > tol:
        raise ValueError(f"{what} sums to {total!r}, not 1")


# ---------------------------------------------------------------------------
# Word indexing
# ---------------------------------------------------------------------------

def word_index(word, alphabet_size: int) -> int:
    """Lexicographic index of ``word``, earliest symbol most significant."""
    idx = 0
    for s in word:
        s = int(s)
        if not 0 <= s < alphabet_size:
            raise ValueError(f"symbol {s} outside alphabet of size {alphabet_size}")
        idx = idx * alphabet_size + s
    return idx


def index_word(index: int, alphabet_size: int, length: int) -> tuple[int, ...]:
    """Inverse of :func:`word_index`."""
    out = []
    for _ in range(length):
        index, s = divmod(index, alphabet_size)
        out.append(s)
    return tuple(reversed(out))


def all_words(alphabet_size: int, length: int) -> np.ndarray:
    """All words of ``length`` as rows of an int array, in index order."""
    n_words = alphabet_size**length
    idx = np.arange(n_words)
    cols = [(idx // alphabet_size ** (length - 1 - j)) % alphabet_size for j in range(length)]
    if not cols:
        return np.zeros((1, 0), dtype=np.int64)
    return np.stack(cols, axis=1).astype(np.int64)


# ---------------------------------------------------------------------------
# Block distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BlockDistribution:
    """Probability vector over all words of a fixed length."""

    alphabet_size: int
    block_length: int
    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen(self.probs)
        object.__setattr__(self, "probs", probs)
        if probs.shape != (self.alphabet_size**self.block_length,):
            raise ValueError(
                f"expected {self.alphabet_size**self.block_length} entries, got {probs.shape}"
            )
        _check_probability_vector(probs, NORMALIZATION_TOL, "block distribution")

    def prob(self, word) -> float:
        if len(word) != self.block_length:
            raise ValueError("word length does not match block length")
        return float(self.probs[word_index(word, self.alphabet_size)])

    def drop_last(self) -> np.ndarray:
        """Marginal on the first ``n-1`` coordinates."""
        K = self.alphabet_size
        return self.probs.reshape(-1, K).sum(axis=1)

    def drop_first(self) -> np.ndarray:
        """Marginal on the last ``n-1`` coordinates."""
        K = self.alphabet_size
        return self.probs.reshape(K, -1).sum(axis=0)

    def is_consistent(self, tol: float = NORMALIZATION_TOL) -> bool:
        if self.block_length < 2:
            return True
        return bool(np.max(np.abs(self.drop_last() - self.drop_first())) <= tol)


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Bernoulli:
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen(self.weights))

    @property
    def alphabet_size(self) -> int:
        return self.weights.size


@dataclass(frozen=True, eq=False)
class Markov:
    """Order-``r`` Markov measure.

    ``kernel[w, a]`` is the probability of symbol ``a`` after memory word
    ``w`` (length ``order``), and ``stationary`` is the invariant distribution
    on memory words.  ``reducible`` records whether the transfer graph on
    memory words has more than one strongly connected component.
    """

    order: int
    kernel: np.ndarray
    stationary: np.ndarray
    reducible: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kernel", _frozen(self.kernel))
        object.__setattr__(self, "stationary", _frozen(self.stationary))

    @property
    def alphabet_size(self) -> int:
        return self.kernel.shape[1]


@dataclass(frozen=True, eq=False)
class Factor:
    """Image of ``source`` under the symbol map ``coding``."""

    source: "StationaryMeasure"
    coding: np.ndarray
    alphabet_size: int = field(default=-1)

    def __post_init__(self):
        coding = np.array(self.coding, dtype=np.int64)
        coding.setflags(write=False)
        object.__setattr__(self, "coding", coding)
        if self.alphabet_size < 0:
            object.__setattr__(self, "alphabet_size", int(coding.max()) + 1)


StationaryMeasure = Union[Bernoulli, Markov, Factor]


def bernoulli_from_weights(weights) -> Bernoulli:
    w = np.asarray(weights, dtype=float)
    _check_probability_vector(w, INPUT_TOL, "weights")
    return Bernoulli(w)


def _transfer_matrix(kernel: np.ndarray, order: int) -> sparse.csr_matrix:
    """Sparse transfer operator on memory words of length ``order``."""
    n_states, K = kernel.shape
    rows, cols = np.nonzero(kernel)
    targets = (rows % K ** (order - 1)) * K + cols
    return sparse.csr_matrix((kernel[rows, cols], (rows, targets)), shape=(n_states, n_states))


def _is_reducible(P) -> bool:
    n_comp, _ = connected_components(sparse.csr_matrix(P) > 0, directed=True, connection="strong")
    return n_comp > 1


def _fixed_point(P: np.ndarray) -> np.ndarray:
    """Stationary vector reached by the lazy chain from the uniform start.

    The lazy chain ``(I + P) / 2`` has the same invariant vectors as ``P``
    and is aperiodic, so its powers converge; repeated squaring reaches
    ``2**k`` steps in ``k`` multiplications.
    """
    P = P.toarray() if sparse.issparse(P) else P
    n = P.shape[0]
    M = 0.5 * (np.eye(n) + P)
    for _ in range(64):
        M2 = M @ M
        M2 /= M2.sum(axis=1, keepdims=True)
        done = np.max(np.abs(M2 - M)) < 1e-15
        M = M2
        if done:
            break
    x = np.full(n, 1.0 / n) @ M
    lazy = 0.5 * (np.eye(n) + P)
    for _ in range(20):
        x = x @ lazy
        x /= x.sum()
    x = np.clip(x, 0.0, None)
    return x / x.sum()


def markov_from_kernel(order: int, kernel, stationary=None) -> Markov:
    """Build an order-``order`` Markov measure from its kernel rows.

    ``kernel`` has shape ``(K**order, K)``.  When ``stationary`` is omitted it
    is computed as the fixed point of the transfer operator reached from the
    uniform start; reducible chains are accepted and flagged.
    """
    if order < 1:
        raise ValueError("Markov order must be at least 1")
    kernel = np.asarray(kernel, dtype=float)
    if kernel.ndim != 2:
        raise ValueError("kernel must be a 2-d array of rows")
    K = kernel.shape[1]
    if kernel.shape[0] != K**order:
        raise ValueError(f"kernel needs {K**order} rows for order {order}, got {kernel.shape[0]}")
    check_budget(kernel.size, "Markov kernel")
    if not np.all(np.isfinite(kernel)) or np.any(kernel < 0):
        raise ValueError("kernel rows must be nonnegative and finite")
    row_err = np.abs(kernel.sum(axis=1) - 1.0)
    if np.any(row_err > INPUT_TOL):
        bad = int(np.argmax(row_err))
        raise ValueError(f"kernel row {bad} sums to {kernel[bad].sum()!r}, not 1")
    P = _transfer_matrix(kernel, order)
    if stationary is None:
        check_budget(kernel.shape[0] ** 2, "dense stationary solve")
        pi = _fixed_point(P)
    else:
        pi = np.asarray(stationary, dtype=float)
        _check_probability_vector(pi, INPUT_TOL, "stationary distribution")
    residual = np.max(np.abs(P.T @ pi - pi))
    if residual > FIXED_POINT_TOL:
        raise ValueError(f"stationary distribution residual {residual:.3g} exceeds tolerance")
    return Markov(order, kernel, pi, reducible=_is_reducible(P))


def random_markov(alphabet_size: int, order: int, seed, concentration: float = 1.0) -> Markov:
    """Markov measure with Dirichlet kernel rows, deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    kernel = rng.dirichlet(np.full(alphabet_size, concentration), size=alphabet_size**order)
    return markov_from_kernel(order, kernel)


def factor_of(source: StationaryMeasure, coding, alphabet_size: int | None = None) -> Factor:
    coding = np.asarray(coding, dtype=np.int64)
    if coding.shape != (source.alphabet_size,):
        raise ValueError(
            f"coding must map all {source.alphabet_size} source symbols, got shape {coding.shape}"
        )
    if np.any(coding < 0):
        raise ValueError("coding targets must be nonnegative")
    target = int(coding.max()) + 1 if alphabet_size is None else int(alphabet_size)
    if set(coding.tolist()) != set(range(target)):
        raise ValueError("coding must be surjective onto its target alphabet")
    return Factor(source, coding, target)


def transfer_matrix(m: Markov) -> sparse.csr_matrix:
    return _transfer_matrix(m.kernel, m.order)


def higher_block(m: StationaryMeasure, length: int) -> Markov:
    """Order-1 Markov presentation of the ``length``-block process of ``m``.

    The symbol at time ``t`` of the result is the index of the word
    ``x[t-length+1 .. t]``.  Requires a Bernoulli measure or a Markov measure
    of order at most ``length``.
    """
    if isinstance(m, Factor):
        raise TypeError("higher block presentation needs a Bernoulli or Markov measure")
    if isinstance(m, Markov) and m.order > length:
        raise ValueError("block length must be at least the Markov order")
    K = m.alphabet_size
    n_states = K**length
    check_budget(n_states**2, "higher-block transfer matrix")
    pi = block_marginal(m, length).probs
    kernel = np.zeros((n_states, n_states))
    states = np.arange(n_states)
    if isinstance(m, Bernoulli):
        rows = np.broadcast_to(m.weights, (n_states, K))
    else:
        rows = m.kernel[states % K**m.order]
    shifted = (states % K ** (length - 1)) * K
    for a in range(K):
        kernel[states, shifted + a] = rows[:, a]
    return Markov(1, kernel, pi, reducible=_is_reducible(kernel))


# ---------------------------------------------------------------------------
# Marginals
# ---------------------------------------------------------------------------

def block_marginal(m: StationaryMeasure, n: int, budget: int | None = None) -> BlockDistribution:
    """Distribution of the word ``x[0..n-1]`` under ``m``."""
    if n < 1:
        raise ValueError("block length must be at least 1")
    K = m.alphabet_size
    check_budget(K**n, f"block marginal of length {n}", budget)
    if isinstance(m, Bernoulli):
        p = np.ones(1)
        for _ in range(n):
            p = (p[:, None] * m.weights[None, :]).ravel()
    elif isinstance(m, Markov):
        r = m.order
        if n <= r:
            p = m.stationary.reshape(K**n, K ** (r - n)).sum(axis=1)
        else:
            p = np.array(m.stationary)
            for length in range(r, n):
                memory = np.arange(K**length) % K**r
                p = (p[:, None] * m.kernel[memory]).ravel()
    elif isinstance(m, Factor):
        from .entropy import factor_word_masses

        words, masses = factor_word_masses(m, n, budget=budget)
        p = np.bincount(words, weights=masses, minlength=K**n)
    else:
        raise TypeError(f"unsupported measure type {type(m).__name__}")
    p = np.clip(p, 0.0, None)
    total = p.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"block marginal lost mass: total {total!r}")
    return BlockDistribution(K, n, p / total)


def kernel_from_marginals(m: StationaryMeasure, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Conditional rows ``P(a | w)`` read off the ``order+1``-block marginal.

    Returns ``(kernel, memory_mass)``; rows with zero memory mass are NaN.
    """
    K = m.alphabet_size
    joint = block_marginal(m, order + 1).probs.reshape(K**order, K)
    mass = joint.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        kernel = joint / mass[:, None]
    kernel[mass == 0] = np.nan
    return kernel, mass


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample_path(m: StationaryMeasure, length: int, seed) -> np.ndarray:
    """Draw a stationary path of ``length`` symbols, deterministic in ``seed``."""
    if length < 1:
        raise ValueError("path length must be at least 1")
    rng = np.random.default_rng(seed)
    if isinstance(m, Bernoulli):
        return rng.choice(m.alphabet_size, size=length, p=m.weights)
    if isinstance(m, Factor):
        return m.coding[sample_path(m.source, length, rng)]
    K, r = m.alphabet_size, m.order
    start = rng.choice(m.stationary.size, p=m.stationary)
    out = np.empty(length + r, dtype=np.int64)
    out[:r] = index_word(int(start), K, r)
    cdf = np.cumsum(m.kernel, axis=1)
    cdf[:, -1] = 1.0
    u = rng.random(length)
    state = int(start)
    mod = K ** (r - 1)
    for t in range(length):
        a = int(np.searchsorted(cdf[state], u[t], side="right"))
        out[t + r] = a
        state = (state % mod) * K + a
    return out[:length]


# ---------------------------------------------------------------------------
# Countable-alphabet truncation
# ---------------------------------------------------------------------------

class TailPolicy(Enum):
    MERGE_TAIL = "merge_tail"
    RENORMALIZE = "renormalize"


@dataclass(frozen=True)
class TailTruncation:
    cutoff: int
    policy: TailPolicy = TailPolicy.MERGE_TAIL


def geometric_weight(k: int) -> float:
    """Weight ``2**-k`` of symbol ``k`` counted from 1."""
    return 2.0**-k


def geometric_tail(k: int) -> float:
    """Total weight of symbols ``k, k+1, ...`` under :func:`geometric_weight`."""
    return 2.0 ** -(k - 1)


def truncate_countable(
    weight: Callable[[int], float],
    trunc: TailTruncation,
    tail: Callable[[int], float] | None = None,
) -> np.ndarray:
    """Render a weight rule on symbols ``1, 2, ...`` as a length-``cutoff`` vector.

    ``tail(k)`` must return the total weight of symbols ``>= k`` in closed
    form; it defaults to the geometric tail when ``weight`` is
    :func:`geometric_weight`.  ``MERGE_TAIL`` pools everything from the last
    kept symbol onward; ``RENORMALIZE`` drops it and rescales.
    """
    K = trunc.cutoff
    if K < 1:
        raise ValueError("cutoff must be at least 1")
    if tail is None and weight is geometric_weight:
        tail = geometric_tail
    head = np.array([weight(k) for k in range(1, K + 1)], dtype=float)
    if np.any(head < 0):
        raise ValueError("weights must be nonnegative")
    if K == 1:
        return np.ones(1)
    if trunc.policy is TailPolicy.MERGE_TAIL:
        if tail is None:
            raise ValueError("MergeTail needs a closed-form tail sum")
        head[-1] = tail(K)
        return head / math.fsum(head.tolist())
    total = math.fsum(head.tolist())
    if total <= 0:
        raise ValueError("kept weights have zero mass")
    return head / total
