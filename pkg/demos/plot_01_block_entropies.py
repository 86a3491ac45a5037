"""
Block entropies of a stationary source
======================================

Block entropies ``H_n`` grow linearly at the entropy rate once the memory of
the source is exhausted.  For a Markov chain the conditional block entropy
``H_{n+1} - H_n`` is flat from the order onwards.
"""
import math

import numpy as np

from shiftent import (
    block_entropies,
    entropy_rate,
    factor_bracket,
    factor_of,
    markov_from_kernel,
    random_markov,
    shannon,
)

# a dyadic distribution has an entropy we can write down: 7/4 bits
print("H(1/2, 1/4, 1/8, 1/8) =", shannon([0.5, 0.25, 0.125, 0.125]), "vs", 1.75 * math.log(2))

# the two-state chain from the textbooks
chain = markov_from_kernel(1, [[0.9, 0.1], [0.2, 0.8]])
H = block_entropies(chain, 6)
print("conditional block entropies:", np.diff(H))
print("exact rate:", entropy_rate(chain).value)

# an order-3 source needs three symbols of memory before the increments settle
src = random_markov(2, 3, seed=7)
print("order-3 increments:", np.round(np.diff(block_entropies(src, 7)), 6))

# lumping two symbols of a chain gives a hidden Markov process; its rate is
# only known up to a bracket, which narrows as the memory grows
hidden = factor_of(random_markov(3, 1, seed=1), [0, 1, 1])
for n in (1, 2, 4, 8):
    b = factor_bracket(hidden, n)
    print(f"n={n}: {b.lower:.6f} <= h <= {b.upper:.6f}")
