import itertools

import numpy as np
import pytest

from sfsat.formula import Formula


def brute_force_sat(formula: Formula) -> bool:
    """Truth-table oracle: enumerate all 2**n assignments."""
    n = formula.n
    if formula.m == 0:
        return True
    if n == 0:
        return False
    table = np.array(list(itertools.product([False, True], repeat=n)), dtype=bool)
    alive = np.ones(table.shape[0], dtype=bool)
    for clause in formula.clauses():
        sat = np.zeros(table.shape[0], dtype=bool)
        for lit in clause:
            col = table[:, abs(lit) - 1]
            sat |= col if lit > 0 else ~col
        alive &= sat
        if not alive.any():
            return False
    return bool(alive.any())


def random_formula(rng, n, m, k, widths=None):
    """Uniform random clauses over distinct variables (independent of the generator)."""
    clauses = []
    for _ in range(m):
        w = k if widths is None else int(rng.choice(widths))
        vars_ = rng.choice(np.arange(1, n + 1), size=min(w, n), replace=False)
        signs = rng.choice([-1, 1], size=vars_.size)
        clauses.append(tuple(int(v) for v in vars_ * signs))
    return Formula.from_clauses(n, clauses)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
