"""Pitskel's refined partition over the geometric Bernoulli shift.

The base system is i.i.d. on symbols ``0..K-1`` (labels ``1..K`` in one-based counting) with
weights ``2**-k`` truncated at ``K``.  A refined atom lying over head symbol
``k`` pins the head and the ``window(k)`` symbols before it, where
``window(k) = 2**k`` (label ``k`` counted from 1), optionally capped at ``W``.

Given the refined labels at times ``-1..-n``, the base coordinates
``-l..-1`` are known, with ``l = max_i (i + window(k_i))``.  The next label
then carries the fresh head (entropy ``H(eta)``) plus every coordinate of its
window that reaches beyond ``-l``; by independence of the base coordinates

    H(zeta | zeta_{-n}^{-1}) = H(eta) * (1 + E[ sum_k nu_k (window(k) - l)^+ ]).

The brute-force routine recomputes the same quantity from raw cylinder
probabilities and exists to certify that formula.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .entropy import _plogp_sum, factor_bracket, shannon
from .hull import hull_entropy_rate, markov_hull
from .measures import (
    Bernoulli,
    BudgetExceeded,
    Factor,
    TailPolicy,
    TailTruncation,
    all_words,
    bernoulli_from_weights,
    block_marginal,
    check_budget,
    factor_of,
    geometric_weight,
    higher_block,
    truncate_countable,
)

BRUTE_FORCE_LIMIT = 10**7


@dataclass(frozen=True)
class PitskelConfig:
    K: int
    W: int | None = 8
    policy: TailPolicy = TailPolicy.MERGE_TAIL

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if self.W is not None and self.W < 1:
            raise ValueError("window cap W must be positive")

    def window(self, k: int) -> int:
        """Window length over 0-based head symbol ``k``."""
        w = 2 ** (k + 1)
        return w if self.W is None else min(w, self.W)

    @property
    def windows(self) -> np.ndarray:
        return np.array([self.window(k) for k in range(self.K)], dtype=np.int64)

    @property
    def max_window(self) -> int:
        return int(self.windows.max())

    @property
    def base_weights(self) -> np.ndarray:
        return truncate_countable(geometric_weight, TailTruncation(self.K, self.policy))

    @property
    def base(self) -> Bernoulli:
        return bernoulli_from_weights(self.base_weights)

    def label_offsets(self) -> np.ndarray:
        sizes = [self.K ** self.window(k) for k in range(self.K)]
        return np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)

    @property
    def n_labels(self) -> int:
        return int(self.label_offsets()[-1])


@dataclass(frozen=True)
class ZetaAtom:
    head: int
    tail_word: tuple[int, ...]  # symbols at times -1, -2, ..., -window(head)


@dataclass(frozen=True)
class ConditioningAtom:
    heads: tuple[int, ...]  # head symbols at times -1, ..., -n
    l: int


def conditioning_atom(cfg: PitskelConfig, heads) -> ConditioningAtom:
    heads = tuple(int(k) for k in heads)
    l = max(i + cfg.window(k) for i, k in enumerate(heads, start=1))
    return ConditioningAtom(heads, l)


def label_of(cfg: PitskelConfig, atom: ZetaAtom) -> int:
    if len(atom.tail_word) != cfg.window(atom.head):
        raise ValueError("tail word length must equal the head's window")
    idx = 0
    for s in atom.tail_word:
        idx = idx * cfg.K + int(s)
    return int(cfg.label_offsets()[atom.head]) + idx


def atom_of(cfg: PitskelConfig, label: int) -> ZetaAtom:
    offsets = cfg.label_offsets()
    if not 0 <= label < offsets[-1]:
        raise ValueError(f"label {label} out of range")
    head = int(np.searchsorted(offsets, label, side="right") - 1)
    rest = label - int(offsets[head])
    tail = []
    for _ in range(cfg.window(head)):
        rest, s = divmod(rest, cfg.K)
        tail.append(s)
    return ZetaAtom(head, tuple(reversed(tail)))


def atom_probability(cfg: PitskelConfig, atom: ZetaAtom) -> float:
    w = cfg.base_weights
    return float(w[atom.head] * np.prod([w[s] for s in atom.tail_word]))


# ---------------------------------------------------------------------------
# Conditional entropy given n past labels
# ---------------------------------------------------------------------------

def _memory_reach_distribution(cfg: PitskelConfig, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Support and probabilities of ``l`` for i.i.d. heads at times ``-1..-n``.

    ``P(l <= t) = prod_i P(window(k_i) <= t - i)``.
    """
    weights = cfg.base_weights
    windows = cfg.windows
    support = np.arange(1, n + int(windows.max()) + 1)
    cdf = np.ones(support.size)
    for i in range(1, n + 1):
        below = np.array([weights[windows <= t - i].sum() for t in support])
        cdf *= below
    pmf = np.diff(np.concatenate([[0.0], cdf]))
    return support, np.clip(pmf, 0.0, None)


def expected_unpinned(cfg: PitskelConfig, n: int) -> float:
    """``E[ sum_k nu_k (window(k) - l)^+ ]``: mean count of fresh past coordinates."""
    if n < 1:
        raise ValueError("memory n must be at least 1")
    weights = cfg.base_weights
    windows = cfg.windows
    support, pmf = _memory_reach_distribution(cfg, n)
    excess = np.clip(windows[None, :] - support[:, None], 0, None)
    per_l = excess @ weights
    return math.fsum((pmf * per_l).tolist())


def zeta_conditional_entropy_exact(cfg: PitskelConfig, n: int) -> float:
    """Entropy of the refined label at time 0 given the labels at ``-n..-1``."""
    h_eta = shannon(cfg.base_weights)
    return h_eta * (1.0 + expected_unpinned(cfg, n))


def zeta_conditional_entropy_lower_bound(cfg: PitskelConfig, n: int) -> float:
    """The head-free part: averaged ``sum_{window(k) > l} nu_k (window(k) - l) H(eta)``."""
    return shannon(cfg.base_weights) * expected_unpinned(cfg, n)


def _labels_at(cfg: PitskelConfig, y: np.ndarray, t: int) -> np.ndarray:
    """Labels at column ``t`` for each row of base words ``y``."""
    offsets = cfg.label_offsets()
    heads = y[:, t]
    out = np.empty(y.shape[0], dtype=np.int64)
    for k in np.unique(heads):
        rows = heads == k
        w = cfg.window(int(k))
        if t - w < 0:
            raise ValueError("insufficient context at the boundary")
        idx = np.zeros(int(rows.sum()), dtype=np.int64)
        for j in range(1, w + 1):
            idx = idx * cfg.K + y[rows, t - j]
        out[rows] = offsets[k] + idx
    return out


def zeta_conditional_entropy_bruteforce(cfg: PitskelConfig, n: int) -> float:
    """Same quantity from raw cylinder probabilities over all base words."""
    if n < 1:
        raise ValueError("memory n must be at least 1")
    length = n + cfg.max_window + 1
    check_budget(cfg.K**length, "Pitskel brute-force cylinders", BRUTE_FORCE_LIMIT)
    y = all_words(cfg.K, length)
    prob = block_marginal(cfg.base, length).probs
    # column length-1 is time 0, column length-1-i is time -i
    labels = np.stack([_labels_at(cfg, y, length - 1 - i) for i in range(n, -1, -1)], axis=1)
    _, joint_idx = np.unique(labels, axis=0, return_inverse=True)
    _, past_idx = np.unique(labels[:, :-1], axis=0, return_inverse=True)
    joint = np.bincount(joint_idx.ravel(), weights=prob)
    past = np.bincount(past_idx.ravel(), weights=prob)
    return max(0.0, _plogp_sum(joint) - _plogp_sum(past))


# ---------------------------------------------------------------------------
# Label process
# ---------------------------------------------------------------------------

def label_coding(cfg: PitskelConfig) -> np.ndarray:
    """Label of each ``(max_window + 1)``-word, read with its last symbol as head."""
    L = cfg.max_window + 1
    words = all_words(cfg.K, L)
    return _labels_at(cfg, words, L - 1)


def build_label_process(cfg: PitskelConfig) -> Factor:
    """The stationary process of refined labels, as a factor of the higher-block chain."""
    chain = higher_block(cfg.base, cfg.max_window + 1)
    return factor_of(chain, label_coding(cfg), cfg.n_labels)


def encode_path(cfg: PitskelConfig, y) -> np.ndarray:
    """Refined labels at positions ``max_window .. len(y)-1`` of a base path."""
    y = np.asarray(y, dtype=np.int64)
    L = cfg.max_window
    if y.size <= L:
        raise ValueError(f"path of length {y.size} leaves no position with a full window {L}")
    if np.any((y < 0) | (y >= cfg.K)):
        raise ValueError("path has symbols outside the base alphabet")
    windows = np.lib.stride_tricks.sliding_window_view(y, L + 1)
    return _labels_at(cfg, np.ascontiguousarray(windows), L)


def decode_heads(cfg: PitskelConfig, labels) -> np.ndarray:
    offsets = cfg.label_offsets()
    return np.searchsorted(offsets, np.asarray(labels), side="right") - 1


# ---------------------------------------------------------------------------
# Counterexample sweep
# ---------------------------------------------------------------------------

@dataclass
class SweepRow:
    K: int
    n: int
    h_mu: float
    h_hull: float

    @property
    def gap(self) -> float:
        return self.h_hull - self.h_mu


@dataclass
class SweepReport:
    W: int | None
    rows: list[SweepRow]
    marginal_checks: dict = field(default_factory=dict)  # (K, n) -> max |hull - source| on blocks <= n+1
    hull_rate_checks: dict = field(default_factory=dict)  # (K, n) -> |hull rate - exact formula|

    def series(self, n: int) -> list[SweepRow]:
        return sorted((r for r in self.rows if r.n == n), key=lambda r: r.K)

    @property
    def h_mu_bounded(self) -> bool:
        return all(r.h_mu <= 2 * math.log(2) + 1e-9 for r in self.rows)

    def hull_increasing(self, n: int) -> bool:
        s = self.series(n)
        return all(b.h_hull > a.h_hull for a, b in zip(s, s[1:]))

    def gap_increasing(self, n: int) -> bool:
        s = self.series(n)
        return all(b.gap > a.gap for a, b in zip(s, s[1:]))

    @property
    def divergence_trend(self) -> bool:
        ns = sorted({r.n for r in self.rows})
        return self.h_mu_bounded and all(
            self.hull_increasing(n) and self.gap_increasing(n) for n in ns
        )


def counterexample_sweep(
    Ks,
    n_max: int,
    W: int | None = 8,
    policy: TailPolicy = TailPolicy.MERGE_TAIL,
    verify_budget: int = 2**14,
) -> SweepReport:
    """Base rate against hull rates of the label process over a range of cutoffs.

    The ``n``-hull of the label process has rate equal to the label
    process's conditional entropy at memory ``n``, evaluated by the exact
    formula.  Where the label process is small enough (``verify_budget``
    bounds its ``(n+1)``-block enumeration) the hull is actually built and
    its marginals and rate are checked against the source.
    """
    rows = []
    report = SweepReport(W, rows)
    for K in Ks:
        cfg = PitskelConfig(K, W, policy)
        h_mu = shannon(cfg.base_weights)
        for n in range(1, n_max + 1):
            h_hull = zeta_conditional_entropy_exact(cfg, n)
            rows.append(SweepRow(K, n, h_mu, h_hull))
            if cfg.n_labels ** (n + 1) > verify_budget:
                continue
            try:
                proc = build_label_process(cfg)
                hull = markov_hull(proc, n, budget=verify_budget)
            except BudgetExceeded:
                continue
            worst = 0.0
            for j in range(1, n + 2):
                a = block_marginal(proc, j).probs
                b = block_marginal(hull.hull, j).probs
                worst = max(worst, float(np.max(np.abs(a - b))))
            report.marginal_checks[(K, n)] = worst
            report.hull_rate_checks[(K, n)] = abs(hull_entropy_rate(hull) - h_hull)
    return report


def label_process_bracket(cfg: PitskelConfig, n: int, budget: int | None = None):
    """Entropy-rate bracket of the label process at memory ``n``."""
    return factor_bracket(build_label_process(cfg), n, budget)
