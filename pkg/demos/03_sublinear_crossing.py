"""
Sublinear thresholds for 1/2 < beta < 1
=======================================

Above beta = 1/2 the 2-SAT threshold no longer grows linearly in n but like
n**(2(1 - beta)). Bracketing plus bisection finds the clause count m_50
where half the formulas are unsatisfiable.
"""

from sfsat.harness import find_crossing, fit_scaling_exponent
from sfsat.theory import threshold_2sat

beta = 0.7
crossings = []
for e in range(10, 14):
    c = find_crossing(2**e, 2, beta, trials_per_probe=50)
    crossings.append(c)
    print(f"n = 2^{e}: m_50 = {c.m_50} +- {c.confidence_halfwidth}, leading-order theory {threshold_2sat(beta, c.n):.0f}")

print(f"fitted exponent {fit_scaling_exponent(crossings):.3f}, theory {2 * (1 - beta):.1f}")
