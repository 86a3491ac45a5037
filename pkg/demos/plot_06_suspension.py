"""
Towers and truncated partitions
===============================

A tower over a geometric Bernoulli base with ceiling ``f = (0, 1, 2, 3)``
has rate ``h(base) / (nu(f) + 1)``.  Coarse partitions that keep only the
first ``q - 1`` tower symbols see less entropy; the harness checks that
hulls of the tower never beat its rate on any of them.
"""
from shiftent import (
    TailTruncation,
    abramov_rate,
    bernoulli_from_weights,
    build_suspension,
    factor_bracket,
    geometric_weight,
    q_schedule,
    suspension_family,
    theorem2_experiment,
    truncate_countable,
)

base = bernoulli_from_weights(truncate_countable(geometric_weight, TailTruncation(4)))
tower = build_suspension(base, (0, 1, 2, 3))
print("tower symbols:", tower.symbols)
print("Abramov rate:", abramov_rate(tower), "bracket:", factor_bracket(tower.measure, 4))

report = theorem2_experiment(suspension_family(tower, range(1, 5)), q_schedule(4), n_max=5)
for m, value in report.inner_limsup.items():
    print(f"q={report.qs[m - 1]}: tail max of lower brackets {value:.6f}")
print("verdict:", report.verdict)
