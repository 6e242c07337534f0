"""
The implied-literal exposure
============================

Starting from one literal, every 2-clause y|z with -y implied forces z.
Below the threshold the implied set closes quickly; above it a positive
fraction of starts runs into a contradiction.
"""

from sfsat import GeneratorParams, generate_formula
from sfsat.harness import exposure_statistics
from sfsat.solver import find_implied_set
from sfsat.theory import ratio_threshold

n, beta = 10**4, 0.3
f = generate_formula(GeneratorParams(n, int(1.5 * ratio_threshold(beta) * n), 2, beta, seed=3))
tr = find_implied_set(f, 1)
print(f"start x1: {tr.outcome.name}, {len(tr.implied)} literals implied, walk peaked at {tr.max_walk}")
print("first cases:", "".join(tr.cases[:40]))

for factor in (0.5, 1.0, 1.5, 2.0):
    st = exposure_statistics(n, beta, int(factor * ratio_threshold(beta) * n), trials=5, starts_per_formula=20)
    print(f"m = {factor} x threshold: closed {st['closed']:.2f}, contradiction {st['contradiction']:.2f}, giant {st['giant']:.2f}")
