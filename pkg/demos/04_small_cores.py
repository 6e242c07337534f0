"""
Small unsatisfiable cores
=========================

When beta > 1 - 1/k the most frequent variables alone carry enough clauses
to be unsatisfiable. The clauses inside variables 1..r are densest near
r*, and restricting an UNSAT formula to a few multiples of r* usually
keeps it UNSAT.
"""

import math

from sfsat.harness import trial_formula, trial_seed
from sfsat.solver import Status, core_restricted_status, solve_dpll
from sfsat.theory import core_exponent, expected_core_density, optimal_core_radius

k, beta, n = 3, 0.9, 2**12
r_star = optimal_core_radius(k, beta)
print(f"r* = {r_star:.2f}; clause count needed grows like n^{core_exponent(k, beta):.1f}")

m = 4500
for r in (10, 35, 71, 300):
    print(f"expected clauses per variable inside 1..{r}: {expected_core_density(n, m, k, beta, r, distinct=True):.2f}")

r = math.ceil(2 * r_star)
full = core = 0
for t in range(20):
    f = trial_formula(n, m, k, beta, trial_seed(0, n, k, beta, t))
    if solve_dpll(f).status is Status.UNSAT:
        full += 1
        core += core_restricted_status(f, r).status is Status.UNSAT
print(f"{full}/20 formulas UNSAT at m = {m}; {core} of them stay UNSAT on variables 1..{r}")
