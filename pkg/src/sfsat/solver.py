"""Satisfiability checks: exact 2-SAT, implied-literal exposure, budgeted DPLL."""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .formula import Formula


class Status(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"

    def __str__(self):
        return self.value


@dataclass
class SatResult:
    status: Status
    witness: np.ndarray | None = None  # witness[v - 1] is the value of variable v
    certificate: int | None = None  # variable x with x <-> -x (2-SAT UNSAT only)
    nodes: int = 0

    @property
    def is_sat(self):
        return self.status is Status.SAT


def satisfies(formula: Formula, assignment) -> bool:
    """True iff the boolean assignment (index v-1 for variable v) satisfies every clause."""
    if formula.m == 0:
        return True
    a = np.asarray(assignment, dtype=bool)
    lits = formula.literals
    true_lit = a[np.abs(lits) - 1] == (lits > 0)
    clause_id = np.repeat(np.arange(formula.m), formula.widths)
    hits = np.bincount(clause_id[true_lit], minlength=formula.m)
    return bool(np.all(hits > 0))


# -- 2-SAT ----------------------------------------------------------------

def _node(lits):
    # literal l -> node 2(|l|-1) + [l < 0]; negation is node ^ 1
    lits = np.asarray(lits, dtype=np.int64)
    return 2 * (np.abs(lits) - 1) + (lits < 0)


def implication_graph(formula: Formula) -> csr_matrix:
    """Implication digraph on 2n literal nodes: clause a|b gives -a -> b and -b -> a.

    Node ``2(v-1)`` is literal ``v`` and node ``2(v-1)+1`` is ``-v``.
    Parallel edges are kept as separate entries summed in the matrix.
    """
    _require_width(formula, 2)
    arr = formula.as_array() if formula.m else np.zeros((0, 2), dtype=np.int64)
    a, b = _node(arr[:, 0]), _node(arr[:, 1])
    src = np.concatenate([a ^ 1, b ^ 1])
    dst = np.concatenate([b, a])
    N = 2 * formula.n
    return csr_matrix((np.ones(src.size, dtype=np.int32), (src, dst)), shape=(N, N))


def _require_width(formula, k):
    w = formula.widths
    if w.size and np.any(w != k):
        raise ValueError(f"every clause must have width {k}")


def _tarjan(n_nodes, indptr, indices):
    """Iterative Tarjan SCC. Components are numbered in reverse topological order."""
    index = [-1] * n_nodes
    low = [0] * n_nodes
    comp = [-1] * n_nodes
    on_stack = [False] * n_nodes
    stack = []
    counter = 0
    ncomp = 0
    indptr = indptr.tolist()
    indices = indices.tolist()
    for root in range(n_nodes):
        if index[root] != -1:
            continue
        work = [(root, indptr[root])]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, pos = work[-1]
            end = indptr[v + 1]
            descended = False
            while pos < end:
                w = indices[pos]
                pos += 1
                if index[w] == -1:
                    work[-1] = (v, pos)
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, indptr[w]))
                    descended = True
                    break
                if on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            work.pop()
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
    return np.array(comp, dtype=np.int64)


def strongly_connected_literals(formula: Formula, method="scipy") -> np.ndarray:
    """Component label of every literal node of the implication graph."""
    g = implication_graph(formula)
    if method == "scipy":
        _, labels = connected_components(g, directed=True, connection="strong")
        return labels
    if method == "tarjan":
        return _tarjan(g.shape[0], g.indptr, g.indices)
    raise ValueError(f"unknown method {method!r}")


def solve_2sat(formula: Formula, witness: bool = True) -> SatResult:
    """Decide a 2-CNF formula in linear time via strongly connected components.

    UNSAT iff some x and -x share a component (the formula contains a
    bicycle); the lowest such variable is returned as certificate. On SAT the
    witness sets x true iff comp(x) precedes comp(-x) in Tarjan's reverse
    topological numbering, and is checked before returning. ``witness=False``
    uses the faster status-only path.
    """
    _require_width(formula, 2)
    n = formula.n
    if witness:
        comp = strongly_connected_literals(formula, "tarjan")
    else:
        comp = strongly_connected_literals(formula, "scipy")
    pos, neg = comp[0::2], comp[1::2]
    clash = np.flatnonzero(pos == neg)
    if clash.size:
        return SatResult(Status.UNSAT, certificate=int(clash[0]) + 1)
    if not witness:
        return SatResult(Status.SAT)
    assignment = pos < neg
    if not satisfies(formula, assignment):
        raise AssertionError("2-SAT witness failed verification")
    return SatResult(Status.SAT, witness=assignment)


# -- exposure: literals implied by a start literal -------------------------

class Outcome(str, enum.Enum):
    CLOSED = "closed"
    CONTRADICTION = "contradiction"
    GIANT = "giant"

    def __str__(self):
        return self.value


@dataclass
class ExposureTrace:
    """Record of one run of the implied-literal exposure.

    ``walk[r]`` is X_r = sum over literals x with o(-x) of (k_x - c_x), after
    iteration r (``walk[0]`` is the initial value). ``cases[r-1]`` is the case
    (A, B or C) of iteration r, and ``k_negz[r-1]``/``c_negz[r-1]`` hold
    k(-z) and c(-z) just before it, so every step can be re-derived.
    """

    start: int
    implied: set
    walk: list = field(default_factory=list)
    cases: list = field(default_factory=list)
    k_negz: list = field(default_factory=list)
    c_negz: list = field(default_factory=list)
    outcome: Outcome = Outcome.CLOSED

    @property
    def max_walk(self):
        return max(self.walk) if self.walk else 0


def find_implied_set(formula: Formula, start: int, giant_fraction: float = 0.01) -> ExposureTrace:
    """Run the implied-literal exposure from literal ``start``.

    Among eligible clauses y|z (with -y already implied) the earliest one in
    formula order is processed; z becomes implied and the clause is removed
    from a working copy. Stops when no clause is eligible or when some
    variable is implied in both polarities.
    """
    _require_width(formula, 2)
    if not 0 < giant_fraction <= 1:
        raise ValueError("giant_fraction must lie in (0, 1]")
    n = formula.n
    if not 1 <= abs(start) <= n:
        raise ValueError("start literal out of range")
    arr = formula.as_array().tolist() if formula.m else []
    N = 2 * n + 1  # literal l stored at offset l + n
    k = [0] * N
    occ = [[] for _ in range(N)]
    for j, (a, b) in enumerate(arr):
        k[a + n] += 1
        k[b + n] += 1
        occ[a + n].append(j)
        if b != a:
            occ[b + n].append(j)
    c = [0] * N
    o = [False] * N
    removed = [False] * len(arr)
    heap: list[int] = []

    def mark(lit):
        o[lit + n] = True
        # clauses containing -lit now hold y = -lit with o(-y) true
        for j in occ[-lit + n]:
            if not removed[j]:
                heapq.heappush(heap, j)

    mark(start)
    X = k[-start + n]
    trace = ExposureTrace(start=start, implied=set(), walk=[X])
    contradiction = False
    while heap and not contradiction:
        j = heapq.heappop(heap)
        if removed[j]:
            continue
        a, b = arr[j]
        if o[-a + n]:
            y, z = a, b
        else:
            y, z = b, a
        kz, cz = k[-z + n], c[-z + n]
        if o[z + n]:
            case = "A"
        elif o[-z + n]:
            case = "C"
        else:
            case = "B"
        # X bookkeeping mirrors the three updates of the loop body
        was_open = o[z + n]
        if not was_open:
            o[z + n] = True
            X += k[-z + n] - c[-z + n]
        c[y + n] += 1
        if o[-y + n]:
            X -= 1
        c[z + n] += 1
        if o[-z + n]:
            X -= 1
        removed[j] = True
        if not was_open:
            for jj in occ[-z + n]:
                if not removed[jj]:
                    heapq.heappush(heap, jj)
        trace.walk.append(X)
        trace.cases.append(case)
        trace.k_negz.append(kz)
        trace.c_negz.append(cz)
        if o[z + n] and o[-z + n]:
            contradiction = True
    implied = {l - n for l in range(N) if o[l]}
    trace.implied = implied
    if contradiction:
        trace.outcome = Outcome.CONTRADICTION
    elif len(implied) >= giant_fraction * 2 * n:
        trace.outcome = Outcome.GIANT
    return trace


def walk_increment(case, k_negz, c_negz):
    """Change of X for one exposure step, by case."""
    if case == "A":
        return -1
    if case == "B":
        return k_negz - 1
    if case == "C":
        return k_negz - c_negz - 2
    raise ValueError(case)


# -- DPLL -----------------------------------------------------------------

class _Dpll:
    """Counter-based DPLL with unit propagation and pure-literal elimination."""

    def __init__(self, formula: Formula):
        n = self.n = formula.n
        clauses = []
        self.trivially_unsat = False
        for c in formula.clauses():
            s = set(c)
            if any(-l in s for l in s):
                continue  # tautology
            if not s:
                self.trivially_unsat = True
            clauses.append(sorted(s, key=lambda l: (abs(l), l)))
        self.clauses = clauses
        N = 2 * n + 1
        self.occ_lists = [[] for _ in range(N)]
        for j, c in enumerate(clauses):
            for l in c:
                self.occ_lists[l + n].append(j)
        self.occ = [len(lst) for lst in self.occ_lists]  # occurrences in unsatisfied clauses
        self.sat = [0] * len(clauses)
        self.false = [0] * len(clauses)
        self.val = [0] * (n + 1)
        self.active = len(clauses)
        self.trail = []
        self.units = [c[0] for c in clauses if len(c) == 1]
        self.pures = [l for l in range(-n, n + 1) if l and self.occ[l + n] and not self.occ[-l + n]]

    def assign(self, lit):
        """Set literal true; returns False on an emptied clause."""
        n = self.n
        self.val[abs(lit)] = 1 if lit > 0 else -1
        self.trail.append(lit)
        ok = True
        for j in self.occ_lists[lit + n]:
            self.sat[j] += 1
            if self.sat[j] == 1:
                self.active -= 1
                for l in self.clauses[j]:
                    self.occ[l + n] -= 1
                    if self.occ[l + n] == 0 and self.occ[-l + n]:
                        self.pures.append(-l)
        for j in self.occ_lists[-lit + n]:
            self.false[j] += 1
            if self.sat[j] == 0:
                c = self.clauses[j]
                free = len(c) - self.false[j]
                if free == 0:
                    ok = False
                elif free == 1:
                    for l in c:
                        if self.val[abs(l)] == 0:
                            self.units.append(l)
                            break
        return ok

    def unassign_to(self, mark):
        n = self.n
        while len(self.trail) > mark:
            lit = self.trail.pop()
            self.val[abs(lit)] = 0
            for j in self.occ_lists[-lit + n]:
                self.false[j] -= 1
            for j in self.occ_lists[lit + n]:
                self.sat[j] -= 1
                if self.sat[j] == 0:
                    self.active += 1
                    for l in self.clauses[j]:
                        self.occ[l + n] += 1
        self.units.clear()
        self.pures.clear()

    def lit_value(self, lit):
        v = self.val[abs(lit)]
        return v if lit > 0 else -v

    def propagate(self):
        n = self.n
        while self.units or self.pures:
            if self.units:
                lit = self.units.pop()
                v = self.lit_value(lit)
                if v == 1:
                    continue
                if v == -1:
                    return False
                if not self.assign(lit):
                    return False
            else:
                lit = self.pures.pop()
                if self.val[abs(lit)] or not self.occ[lit + n] or self.occ[-lit + n]:
                    continue
                if not self.assign(lit):
                    return False
        return True

    def solve(self, budget):
        if self.trivially_unsat:
            return Status.UNSAT, 0
        if not self.propagate():
            return Status.UNSAT, 0
        n = self.n
        order = sorted(v for v in range(1, n + 1) if self.val[v] == 0 and (self.occ[v + n] or self.occ[n - v]))
        stack = []  # (trail mark, variable, negative branch already taken)
        nodes = 0
        while True:
            if self.active == 0:
                return Status.SAT, nodes
            var = next(v for v in order if self.val[v] == 0 and (self.occ[v + n] or self.occ[n - v]))
            if nodes >= budget:
                return Status.UNKNOWN, nodes
            nodes += 1
            stack.append((len(self.trail), var, False))
            ok = self.assign(var) and self.propagate()
            while not ok:
                while stack and stack[-1][2]:
                    mark, _, _ = stack.pop()
                    self.unassign_to(mark)
                if not stack:
                    return Status.UNSAT, nodes
                mark, var, _ = stack.pop()
                self.unassign_to(mark)
                if nodes >= budget:
                    return Status.UNKNOWN, nodes
                nodes += 1
                stack.append((mark, var, True))
                ok = self.assign(-var) and self.propagate()

    def assignment(self):
        return np.array([v >= 0 for v in self.val[1:]], dtype=bool)


def solve_dpll(formula: Formula, node_budget: int = 10**6) -> SatResult:
    """DPLL with unit propagation and pure-literal elimination.

    Branches on the lowest-index unassigned variable still occurring in an
    unsatisfied clause, positive phase first. ``node_budget`` caps the number
    of branch assignments; exhausting it yields UNKNOWN.
    """
    if node_budget < 1:
        raise ValueError("node_budget must be positive")
    d = _Dpll(formula)
    status, nodes = d.solve(node_budget)
    if status is Status.SAT:
        w = d.assignment()
        if not satisfies(formula, w):
            raise AssertionError("DPLL witness failed verification")
        return SatResult(status, witness=w, nodes=nodes)
    return SatResult(status, nodes=nodes)


def core_clauses(formula: Formula, r: int) -> Formula:
    """Clauses whose every variable lies in 1..r (the set C_r)."""
    if r < 1:
        raise ValueError("r must be positive")
    if formula.m == 0:
        return formula
    outside = np.abs(formula.literals) > r
    clause_id = np.repeat(np.arange(formula.m), formula.widths)
    bad = np.bincount(clause_id[outside], minlength=formula.m)
    return formula.subset(bad == 0)


def core_restricted_status(formula: Formula, r: int, node_budget: int = 10**6) -> SatResult:
    """Solve C_r alone. UNSAT certifies a small unsatisfiable core of the formula."""
    return solve_dpll(core_clauses(formula, r), node_budget)
