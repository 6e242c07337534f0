"""
Occurrence counts of scale-free formulas
========================================

Variable i is drawn with probability proportional to i**-beta, so a few
low-index variables occur very often. The counts K_x follow a power law
with exponent delta = 1/beta + 1.
"""

import numpy as np

from sfsat import GeneratorParams, generate_formula
from sfsat.analysis import empirical_profile, fit_beta, fit_delta_tail, occurrence_counts
from sfsat.sampler import power_law

# the sampler: exact inverse transform over a cumulative table
dist = power_law(1000, 0.5)
print("P(1), P(2), P(1000):", dist.pmf()[[0, 1, -1]])
u = np.random.default_rng(0).random(5)
print("draws for", u.round(3), "->", dist.sample(u))

# one formula with n = 1e5 variables and 2.5 clauses per variable
f = generate_formula(GeneratorParams(n=10**5, m=250_000, k=3, beta=0.82, seed=1))
stats = occurrence_counts(f, distinct=False)
K = np.sort(stats.variable_counts)[::-1]
print("most frequent variables occur", K[:5], "times; the median occurs", int(np.median(K)))

# rank profile slope gives beta, the log-binned tail gives delta
b = fit_beta(empirical_profile(stats))
d = fit_delta_tail(stats)
print(f"beta_hat = {b.beta_hat:.3f} (true 0.82)")
print(f"delta_hat = {d.delta_hat:.3f} (1/0.82 + 1 = {1 / 0.82 + 1:.3f})")
