"""
Entropy of a limit of approximating measures
============================================

Approximants that match a measure on longer and longer blocks, to a
relative precision tending to zero, cannot end up with more entropy than
the measure.  Hull families are the canonical example; we also show what
goes wrong when the approximation hypothesis fails.
"""
import warnings

from shiftent import (
    ApproximationFamily,
    bernoulli_from_weights,
    hull_family,
    random_markov,
    theorem1_experiment,
)

src = random_markov(2, 3, seed=7)
report = theorem1_experiment(hull_family(src, range(1, 7)), hull_family=True)
print("target rate:", report.target_rate.value)
print("hull rates:", [round(r.value, 9) for r in report.rates])
print("max ratio per n:", [f"{h.max_ratio:.1e}" for h in report.hypotheses])
print("verdict:", report.verdict)

# a fair coin is far from a biased one, and its entropy is larger
fam = ApproximationFamily(
    bernoulli_from_weights([0.9, 0.1]), [bernoulli_from_weights([0.5, 0.5])], r=[1], eps=[0.1]
)
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    bad = theorem1_experiment(fam)
print("without the hypothesis:", bad.verdict, "-", caught[0].message)
