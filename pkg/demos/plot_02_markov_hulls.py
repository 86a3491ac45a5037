"""
Markov hulls
============

The ``n``-Markov hull is the order-``n`` chain that agrees with a measure on
all blocks of length at most ``n + 1``.  Its entropy rate is the conditional
block entropy at memory ``n``, so the hull rates decrease to the true rate.
"""
from shiftent import hull_table, markov_hull, random_markov

src = random_markov(2, 3, seed=7)
for row in hull_table(src, range(1, 6)):
    print(f"n={row['n']}: hull rate {row['hull_rate']:.9f}, excess {row['difference']:.2e}")

# the hull kernel is read off the block marginals: mu(wa) / mu(w)
hull = markov_hull(src, 2)
print("order-2 hull kernel:\n", hull.kernel)
