"""
Where scale-free 2-SAT becomes unsatisfiable
============================================

For beta < 1/2 the threshold density is (1 - 2 beta)/(1 - beta)**2 clauses
per variable. A sweep over m/n shows the satisfiable fraction dropping
through 1/2 near that value.
"""

import numpy as np

from sfsat.harness import SweepSpec, run_sweep
from sfsat.theory import ratio_threshold

n = 20_000
ratios = np.round(np.arange(0.5, 1.31, 0.1), 2)
spec = SweepSpec.from_ratios(n, 2, [0.0, 0.3], ratios, trials=20, base_seed=1)
res = run_sweep(spec)

for beta in spec.beta_grid:
    m, frac = res.fractions(beta)
    print(f"beta = {beta}: theory m/n = {ratio_threshold(beta):.3f}, measured crossing {res.crossing(beta) / n:.3f}")
    for mm, f in zip(m, frac):
        print(f"  m/n = {mm / n:.2f}  sat {f:.2f}  " + "#" * int(round(20 * f)))

# the same sweep reruns bit for bit: every trial seed depends only on (seed, n, k, beta, t)
assert run_sweep(spec).to_csv() == res.to_csv()
