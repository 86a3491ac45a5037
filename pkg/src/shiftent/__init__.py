"""Entropy of stationary shift measures, Markov hulls and their limits."""
from .entropy import (
    Bracket,
    LemmaReport,
    RateEstimate,
    block_entropies,
    block_entropy,
    conditional_block_entropy,
    entropy_rate,
    factor_bracket,
    lemma_bound_check,
    lemma_fuzz,
    markov_rate,
    ratio_flip_check,
    shannon,
)
from .harness import (
    ApproximationFamily,
    check_condition,
    hull_family,
    suspension_family,
    theorem1_experiment,
    theorem2_experiment,
    union_stability_check,
)
from .hull import MarkovHull, hull_entropy_rate, hull_table, markov_hull
from .io import load_measure, save_measure
from .measures import (
    Bernoulli,
    BlockDistribution,
    BudgetExceeded,
    Factor,
    Markov,
    TailPolicy,
    TailTruncation,
    bernoulli_from_weights,
    block_marginal,
    factor_of,
    geometric_weight,
    higher_block,
    markov_from_kernel,
    random_markov,
    sample_path,
    truncate_countable,
)
from .pitskel import (
    PitskelConfig,
    counterexample_sweep,
    zeta_conditional_entropy_bruteforce,
    zeta_conditional_entropy_exact,
)
from .suspension import (
    SuspensionSystem,
    TruncatedPartition,
    abramov_rate,
    build_suspension,
    factor_entropy_bracket,
    q_schedule,
)

__version__ = "0.1.0"
