"""Order-n Markov hulls of stationary measures.

The n-Markov hull of ``m`` is the stationary order-``n`` Markov measure that
agrees with ``m`` on every block of length at most ``n + 1``.  Its kernel is
read off the ``(n+1)``-block marginal; its rate equals the conditional entropy
of ``m`` given ``n`` past symbols.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .entropy import conditional_block_entropy, markov_rate
from .measures import Markov, StationaryMeasure, block_marginal, markov_from_kernel


@dataclass(frozen=True, eq=False)
class MarkovHull:
    order: int
    hull: Markov
    source: StationaryMeasure
    flagged_rows: tuple[int, ...]

    @property
    def kernel(self) -> np.ndarray:
        return self.hull.kernel


def markov_hull(m: StationaryMeasure, n: int, budget: int | None = None) -> MarkovHull:
    """Construct the ``n``-Markov hull of ``m``.

    Memory words with zero probability get a uniform row and are listed in
    ``flagged_rows``; they carry no stationary mass.
    """
    if n < 1:
        raise ValueError("hull order must be at least 1")
    K = m.alphabet_size
    joint = block_marginal(m, n + 1, budget).probs.reshape(K**n, K)
    memory = joint.sum(axis=1)
    flagged = np.flatnonzero(memory <= 0)
    kernel = np.full_like(joint, 1.0 / K)
    live = memory > 0
    kernel[live] = joint[live] / memory[live, None]
    # row sums of the joint are the n-block marginal by consistency
    hull = markov_from_kernel(n, kernel, stationary=memory / memory.sum())
    return MarkovHull(n, hull, m, tuple(int(i) for i in flagged))


def hull_entropy_rate(h: MarkovHull) -> float:
    return markov_rate(h.hull)


def hull_table(m: StationaryMeasure, orders, budget: int | None = None) -> list[dict]:
    """Hull rate against the source's conditional entropy for each order."""
    rows = []
    for n in orders:
        h = markov_hull(m, n, budget)
        rate = hull_entropy_rate(h)
        cond = conditional_block_entropy(m, n, budget)
        rows.append({"n": n, "hull_rate": rate, "source_conditional": cond, "difference": rate - cond})
    return rows
