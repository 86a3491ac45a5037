"""Finite-scale checks of the two entropy lower estimates.

An approximation family is a target measure ``mu`` together with measures
``mu_n``, block lengths ``r_n`` and tolerances ``eps_n``.  The hypothesis at
step ``n`` asks that ``|mu(A) - mu_n(A)| <= eps_n mu_n(A)`` for every block
``A`` of length ``r_n + 1``; the conclusion compares ``h(mu)`` with the
limsup of ``h(mu_n)``.

An infinite limsup is rendered as the maximum over the computed tail
``n >= n_min`` (by default the second half of the computed range).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .entropy import LN3, RateEstimate, block_entropy, entropy_rate
from .hull import hull_entropy_rate, markov_hull
from .measures import StationaryMeasure, block_marginal
from .suspension import SuspensionSystem, TruncatedPartition, factor_entropy_bracket

HOLDS, VIOLATED, INCONCLUSIVE = "holds", "violated", "inconclusive"


@dataclass
class ApproximationFamily:
    target: StationaryMeasure
    approximants: list
    r: list[int]
    eps: list[float]
    labels: list[int] | None = None  # index n of each approximant, 1-based by default

    def __post_init__(self):
        if not len(self.approximants) == len(self.r) == len(self.eps):
            raise ValueError("approximants, r and eps must have equal length")
        if self.labels is None:
            self.labels = list(range(1, len(self.approximants) + 1))


def hull_family(target: StationaryMeasure, orders, eps=None, budget: int | None = None):
    """Family ``mu_n = n-Markov hull of mu`` with ``r_n = n``.

    Default tolerances ``eps_n = 0.1 / n`` keep ``2 eps_n < 1/3``.
    """
    orders = list(orders)
    hulls = [markov_hull(target, n, budget).hull for n in orders]
    eps = [0.1 / n for n in orders] if eps is None else list(eps)
    return ApproximationFamily(target, hulls, list(orders), eps, labels=list(orders))


@dataclass
class HypothesisReport:
    n: int
    r: int
    eps: float
    max_ratio: float
    worst_block: tuple[int, ...] | None
    holds: bool
    zero_mismatch: list[tuple[int, ...]] = field(default_factory=list)
    flip_holds: bool | None = None
    replay: dict | None = None


def _worst_ratio(mu: np.ndarray, nu: np.ndarray):
    """Max of ``|mu - nu| / nu`` over ``nu > 0`` and the blocks with ``nu = 0 < mu``."""
    pos = nu > 0
    ratios = np.zeros_like(nu)
    ratios[pos] = np.abs(mu[pos] - nu[pos]) / nu[pos]
    j = int(np.argmax(ratios))
    return float(ratios[j]), j, np.flatnonzero(~pos & (mu > 0))


def check_condition(family: ApproximationFamily, i: int, budget: int | None = None) -> HypothesisReport:
    """Exhaustive ratio check for the ``i``-th approximant over blocks of length ``1..r+1``.

    Also evaluates the flipped bound ``|mu - mu_n| <= 2 eps mu`` on the same
    blocks when ``eps <= 1/2``, and replays the entropy comparison for
    blocks of length ``r`` when ``2 eps < 1/3``.
    """
    from .measures import index_word

    r, eps = family.r[i], family.eps[i]
    K = family.target.alphabet_size
    worst, worst_block, mismatches = 0.0, None, []
    flip = eps <= 0.5 or None
    for length in range(1, r + 2):
        mu = block_marginal(family.target, length, budget).probs
        nu = block_marginal(family.approximants[i], length, budget).probs
        ratio, j, zeros = _worst_ratio(mu, nu)
        if ratio > worst or worst_block is None:
            worst, worst_block = ratio, index_word(j, K, length)
        mismatches.extend(index_word(int(z), K, length) for z in zeros)
        if flip:
            flip = bool(np.all(np.abs(mu - nu) <= 2 * eps * mu + 1e-15))
    holds = worst <= eps and not mismatches
    report = HypothesisReport(
        family.labels[i], r, eps, worst, worst_block, holds, mismatches,
        flip_holds=flip if holds and eps <= 0.5 else None,
    )
    c = 2 * eps
    if holds and c < 1 / 3:
        H_mu = block_entropy(family.target, r, budget)
        H_nu = block_entropy(family.approximants[i], r, budget)
        bound = (1 + c) * H_mu + c * LN3
        report.replay = {"H_approx": H_nu, "H_target": H_mu, "bound": bound,
                         "holds": H_nu <= bound + 1e-10}
    return report


def union_stability_check(mu, nu, eps: float, trials: int, seed, max_size: int | None = None) -> bool:
    """Random unions of atoms keep ``|mu(B) - nu(B)| <= eps nu(B)``.

    ``mu`` and ``nu`` are probability vectors over the same atoms.
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    rng = np.random.default_rng(seed)
    n = mu.size
    for _ in range(trials):
        size = rng.integers(1, (max_size or n) + 1)
        members = rng.choice(n, size=size, replace=False)
        a = math.fsum(mu[members].tolist())
        b = math.fsum(nu[members].tolist())
        if abs(a - b) > eps * b + 1e-12:
            return False
    return True


def tail_max(values, n_min_index: int) -> float:
    return max(values[n_min_index:])


def _verdict(target_lower: float, target_upper: float, rhs: float, tol: float) -> str:
    if target_upper + tol < rhs:
        return VIOLATED
    if target_lower + tol >= rhs:
        return HOLDS
    return INCONCLUSIVE


def _rate(m: StationaryMeasure, n_max: int, budget) -> RateEstimate:
    return entropy_rate(m, n_max, budget)


@dataclass
class Theorem1Report:
    target_rate: RateEstimate
    ns: list[int]
    rates: list[RateEstimate]
    hypotheses: list[HypothesisReport]
    n_min: int
    tail_max_lower: float
    running_max: list[float]
    verdict: str
    decreasing: bool | None = None
    tolerance: float = 1e-8

    def to_dict(self) -> dict:
        return {
            "experiment": "theorem1",
            "limsup_rendering": f"max over computed tail n >= {self.n_min}",
            "target_rate": asdict(self.target_rate),
            "n": self.ns,
            "approximant_rates": [asdict(r) for r in self.rates],
            "running_tail_max": self.running_max,
            "tail_max_lower": self.tail_max_lower,
            "hypotheses": [asdict(h) for h in self.hypotheses],
            "hull_rates_decreasing": self.decreasing,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
        }


def theorem1_experiment(
    family: ApproximationFamily,
    n_min: int | None = None,
    tol: float = 1e-8,
    rate_depth: int = 8,
    hull_family: bool = False,
    budget: int | None = None,
) -> Theorem1Report:
    """Compare ``h(mu)`` with the tail maximum of ``h(mu_n)``.

    Factor measures contribute brackets; the right-hand side uses the
    approximants' lower brackets and the verdict is ``violated`` only when
    even the target's upper bracket falls below it.
    """
    hyps = [check_condition(family, i, budget) for i in range(len(family.approximants))]
    for h in hyps:
        if not h.holds:
            warnings.warn(f"approximation hypothesis fails at n={h.n} (max ratio {h.max_ratio:.3g})")
    target = _rate(family.target, rate_depth, budget)
    rates = [_rate(m, rate_depth, budget) for m in family.approximants]
    ns = list(family.labels)
    if n_min is None:
        n_min = ns[len(ns) // 2]
    start = next(i for i, n in enumerate(ns) if n >= n_min)
    lowers = [r.lower for r in rates]
    running = [max(lowers[start:i + 1]) if i >= start else float("nan") for i in range(len(lowers))]
    rhs = tail_max(lowers, start)
    verdict = _verdict(target.lower, target.upper, rhs, tol)
    decreasing = None
    if hull_family:
        decreasing = all(b.value <= a.value + 1e-10 for a, b in zip(rates, rates[1:])) and all(
            r.value >= target.lower - 1e-10 for r in rates
        )
    return Theorem1Report(target, ns, rates, hyps, n_min, rhs, running, verdict, decreasing, tol)


@dataclass
class Theorem2Report:
    target_rate: RateEstimate
    qs: list[int]
    ns: list[int]
    brackets: dict  # (m, n) -> Bracket of h(mu_n, xi_m)
    target_brackets: dict  # m -> Bracket of h(mu, xi_m)
    inner_limsup: dict  # m -> max over tail n of lower brackets
    rhs: float
    verdict: str
    n_min: int
    tolerance: float = 1e-8

    def trace_rows(self):
        for (m, n), b in sorted(self.brackets.items()):
            yield m, self.qs[m - 1], n, b.lower, b.upper

    def to_dict(self) -> dict:
        return {
            "experiment": "theorem2",
            "limsup_rendering": f"max over computed tail n >= {self.n_min}",
            "target_rate": asdict(self.target_rate),
            "q": self.qs,
            "n": self.ns,
            "target_partition_brackets": {str(m): list(b) for m, b in self.target_brackets.items()},
            "inner_limsup_lower": {str(m): v for m, v in self.inner_limsup.items()},
            "rhs_lower": self.rhs,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
        }


def theorem2_experiment(
    family: ApproximationFamily,
    qs,
    n_max: int = 8,
    n_min: int | None = None,
    tol: float = 1e-8,
    budget: int | None = None,
) -> Theorem2Report:
    """Double limsup over truncated partitions ``xi_m`` (``q(m)`` classes).

    For each ``m`` the rate of every approximant's ``xi_m``-factor is
    bracketed at memory ``n_max``; the inner limsup takes the tail maximum
    of the lower brackets and the outer one the maximum over ``m``.
    """
    qs = list(qs)
    ns = list(family.labels)
    if n_min is None:
        n_min = ns[len(ns) // 2]
    start = next(i for i, n in enumerate(ns) if n >= n_min)
    target = _rate(family.target, n_max, budget)
    brackets, target_brackets, inner = {}, {}, {}
    for m, q in enumerate(qs, start=1):
        t = TruncatedPartition(q)
        target_brackets[m] = factor_entropy_bracket(family.target, t, n_max, budget)
        for n, approx in zip(ns, family.approximants):
            brackets[(m, n)] = factor_entropy_bracket(approx, t, n_max, budget)
        inner[m] = max(brackets[(m, n)].lower for n in ns[start:])
    rhs = max(inner.values())
    verdict = _verdict(target.lower, target.upper, rhs, tol)
    return Theorem2Report(target, qs, ns, brackets, target_brackets, inner, rhs, verdict, n_min, tol)


def suspension_family(system: SuspensionSystem, orders, budget: int | None = None):
    """Hull family of the tower process (the tower measure is the target)."""
    return hull_family(system.measure, orders, budget=budget)
