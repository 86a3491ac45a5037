"""Integral (suspension) towers over a base shift and truncated partitions.

The tower over a base measure with integer ceiling ``f`` has symbols
``(i, k)`` for base symbol ``i`` and level ``0 <= k <= f_i``.  It climbs the
column deterministically and applies the base transition at the top, so for
a Bernoulli or order-1 Markov base the tower is itself an order-1 Markov
chain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entropy import Bracket, entropy_rate, factor_bracket, shannon
from .measures import (
    Bernoulli,
    Factor,
    Markov,
    StationaryMeasure,
    block_marginal,
    check_budget,
    factor_of,
    geometric_weight,
    markov_from_kernel,
    TailTruncation,
    truncate_countable,
)


@dataclass(frozen=True, eq=False)
class SuspensionSystem:
    base: StationaryMeasure
    f: tuple[int, ...]
    symbols: tuple[tuple[int, int], ...]  # tower alphabet, (base symbol, level)
    measure: Markov

    @property
    def mean_height(self) -> float:
        """``nu(f) = sum_i f_i nu(C_i)``."""
        nu = block_marginal(self.base, 1).probs
        return math.fsum((nu * np.array(self.f)).tolist())

    def symbol_index(self, i: int, k: int) -> int:
        return self.symbols.index((i, k))


def build_suspension(base: StationaryMeasure, f) -> SuspensionSystem:
    f = tuple(int(x) for x in f)
    K = base.alphabet_size
    if len(f) != K:
        raise ValueError(f"ceiling needs one height per base symbol ({K}), got {len(f)}")
    if any(x < 0 for x in f):
        raise ValueError("ceiling heights must be nonnegative")
    if isinstance(base, Bernoulli):
        top_rows = np.broadcast_to(base.weights, (K, K))
    elif isinstance(base, Markov) and base.order == 1:
        top_rows = base.kernel
    else:
        raise TypeError("tower needs a Bernoulli or order-1 Markov base")
    symbols = tuple((i, k) for i in range(K) for k in range(f[i] + 1))
    size = len(symbols)
    check_budget(size * size, "tower transfer matrix")
    index = {s: j for j, s in enumerate(symbols)}
    kernel = np.zeros((size, size))
    for (i, k), j in index.items():
        if k < f[i]:
            kernel[j, index[(i, k + 1)]] = 1.0
        else:
            for i2 in range(K):
                kernel[j, index[(i2, 0)]] = top_rows[i, i2]
    nu = block_marginal(base, 1).probs
    mean_height = math.fsum((nu * np.array(f)).tolist())
    stationary = np.array([nu[i] for i, _ in symbols]) / (mean_height + 1.0)
    return SuspensionSystem(base, f, symbols, markov_from_kernel(1, kernel, stationary))


def abramov_rate(system: SuspensionSystem) -> float:
    """Base rate divided by the mean return time ``nu(f) + 1``."""
    return entropy_rate(system.base).value / (system.mean_height + 1.0)


@dataclass(frozen=True)
class TruncatedPartition:
    """Keep the first ``q - 1`` symbols and merge the rest into one class."""

    q: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be at least 1")

    def coding(self, alphabet_size: int) -> np.ndarray:
        return np.minimum(np.arange(alphabet_size), self.q - 1)


def q_schedule(m_max: int) -> list[int]:
    """Default increasing schedule ``q(m) = m + 1``."""
    return [m + 1 for m in range(1, m_max + 1)]


def factor_process(m: StationaryMeasure, t: TruncatedPartition) -> Factor:
    return factor_of(m, t.coding(m.alphabet_size))


def factor_entropy_bracket(
    m: StationaryMeasure, t: TruncatedPartition, n_max: int, budget: int | None = None
) -> Bracket:
    """Bracket on ``h(T, xi_m)``, the rate of the truncated-partition factor."""
    return factor_bracket(factor_process(m, t), n_max, budget)


def tower_partition_entropy(system: SuspensionSystem) -> float:
    """Entropy of the tower's one-symbol partition."""
    return shannon(system.measure.stationary)


def slow_ceiling(K: int) -> tuple[int, ...]:
    """Heights ``floor(2**i / i**2)`` (label ``i`` from 1).

    Under geometric weights ``sum f_i 2**-i`` converges while
    ``sum f_i 2**-i |log 2**-i|`` diverges like the harmonic series.
    """
    return tuple(int(2**i // i**2) for i in range(1, K + 1))


def generator_entropy_sweep(Ks) -> list[dict]:
    """Tower partition entropy and ``nu(f)`` as the geometric base is refined."""
    rows = []
    for K in Ks:
        w = truncate_countable(geometric_weight, TailTruncation(K))
        system = build_suspension(Bernoulli(w), slow_ceiling(K))
        rows.append({
            "K": K,
            "mean_height": system.mean_height,
            "weighted_log_sum": math.fsum((np.array(system.f) * w * -np.log(w)).tolist()),
            "tower_entropy": tower_partition_entropy(system),
        })
    return rows
