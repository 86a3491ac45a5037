"""
A refinement with unbounded finite-memory entropy
=================================================

Refine the one-symbol partition of a geometric Bernoulli shift so that head
symbol ``k`` also reveals the ``2**(k+1)`` symbols before it.  The system's
entropy stays below ``2 ln 2``, but the label process forgets too much: the
entropy of the next label given ``n`` past labels grows with every new
head symbol, so every Markov hull overshoots by more and more.
"""
import math

from shiftent import PitskelConfig, counterexample_sweep, zeta_conditional_entropy_exact

# with the window capped at 8 the growth is a convergent tail sum
report = counterexample_sweep(range(4, 13), n_max=2, W=8)
for row in report.series(2):
    print(f"K={row.K:2d}  h_mu={row.h_mu:.6f}  h_hull_2={row.h_hull:.6f}  gap={row.gap:.6f}")
print("h_mu below 2 ln 2:", report.h_mu_bounded, f"({2 * math.log(2):.6f})")

# without the cap every extra head symbol adds a roughly constant amount
for K in (4, 6, 8, 10):
    print(K, zeta_conditional_entropy_exact(PitskelConfig(K, None), 1))
