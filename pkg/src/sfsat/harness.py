"""Monte Carlo experiments: satisfiable fractions, 50% crossings, scaling fits.

Trial ``t`` at exponent ``beta`` uses the seed ``trial_seed(base, n, k, beta, t)``,
which does not depend on the clause count. Because clause ``j`` is a pure
function of ``(seed, j)``, the formula with ``m`` clauses is a prefix of the
one with ``m' > m`` clauses: each trial's status is monotone in ``m`` and any
single cell can be regenerated from its SweepSpec alone.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import shlex
import struct
import subprocess
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _philox
from .analysis import moment_ratio, occurrence_counts
from .formula import Formula, write_dimacs
from .generator import GeneratorParams, generate_clauses
from .sampler import power_law
from .solver import Outcome, Status, find_implied_set, solve_2sat, solve_dpll, walk_increment
from .theory import counting_bound_ratio

log = logging.getLogger(__name__)

SWEEP_HEADER = ["beta", "m", "n", "trials", "sat", "unsat", "unknown", "sat_fraction", "seed_base", "errors", "mean_ratio"]
CROSSING_HEADER = ["n", "k", "beta", "m_50", "halfwidth"]


def _beta_word(beta):
    return struct.unpack("<Q", struct.pack("<d", float(beta)))[0]


def trial_seed(base_seed: int, n: int, k: int, beta: float, t: int) -> int:
    """64-bit formula seed for trial ``t`` of the (n, k, beta) family."""
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(int(n), int(k), _beta_word(beta), int(t)))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SolverSpec:
    """Which decision procedure to run: ``two_sat``, ``dpll`` or ``external``.

    ``external`` runs ``command`` (a template containing ``{cnf}``) and reads
    the exit status: 10 SAT, 20 UNSAT, anything else is an error.
    """

    kind: str = "two_sat"
    budget: int = 10**5
    command: str | None = None
    timeout: float | None = None

    def __post_init__(self):
        if self.kind not in ("two_sat", "dpll", "external"):
            raise ValueError(f"unknown solver {self.kind!r}")
        if self.kind == "external" and (not self.command or "{cnf}" not in self.command):
            raise ValueError("external solver needs a command template containing {cnf}")

    def run(self, formula: Formula) -> Status | None:
        """Status, or None when an external solver fails."""
        if self.kind == "two_sat":
            return solve_2sat(formula, witness=False).status
        if self.kind == "dpll":
            return solve_dpll(formula, self.budget).status
        return _run_external(self.command, formula, self.timeout)


def _run_external(template, formula, timeout):
    with tempfile.NamedTemporaryFile("wb", suffix=".cnf", delete=False) as fh:
        write_dimacs(formula, fh)
        path = fh.name
    try:
        cmd = [a.replace("{cnf}", path) for a in shlex.split(template)]
        proc = subprocess.run(cmd, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL, timeout=timeout)
    except (OSError, subprocess.TimeoutExpired) as exc:
        log.warning("external solver failed: %s", exc)
        return None
    finally:
        os.unlink(path)
    if proc.returncode == 10:
        return Status.SAT
    if proc.returncode == 20:
        return Status.UNSAT
    log.warning("external solver exit status %d", proc.returncode)
    return None


def trial_formula(n, m, k, beta, seed) -> Formula:
    """Same clauses as ``generate_formula(GeneratorParams(n, m, k, beta, seed))``."""
    dist = power_law(n, beta)
    clauses, _ = generate_clauses(dist, k, np.arange(m), _philox.stream_key(seed))
    meta = GeneratorParams(n, m, k, beta, seed).metadata()
    return Formula.from_array(n, clauses, meta)


@dataclass(frozen=True)
class SweepSpec:
    n: int
    k: int
    beta_grid: tuple
    m_grid: tuple
    trials: int = 10
    solver: SolverSpec = field(default_factory=SolverSpec)
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "beta_grid", tuple(float(b) for b in self.beta_grid))
        object.__setattr__(self, "m_grid", tuple(int(m) for m in self.m_grid))
        if not self.beta_grid or not self.m_grid:
            raise ValueError("grids must be nonempty")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if min(self.m_grid) < 1:
            raise ValueError("clause counts must be positive")
        if self.solver.kind == "two_sat" and self.k != 2:
            raise ValueError("the two_sat solver needs k = 2")

    @classmethod
    def from_ratios(cls, n, k, beta_grid, ratio_grid, **kw):
        """Clause grid ``round(ratio * n)`` for each ratio."""
        return cls(n, k, tuple(beta_grid), tuple(int(round(r * n)) for r in ratio_grid), **kw)


@dataclass
class SweepRow:
    beta: float
    m: int
    n: int
    trials: int
    sat: int
    unsat: int
    unknown: int
    errors: int
    mean_ratio: float
    seed_base: int

    @property
    def sat_fraction(self) -> float:
        decided = self.sat + self.unsat
        return self.sat / decided if decided else math.nan

    @property
    def unsat_fraction(self) -> float:
        decided = self.sat + self.unsat
        return self.unsat / decided if decided else math.nan

    def as_dict(self):
        d = asdict(self)
        d["sat_fraction"] = self.sat_fraction
        return d


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.DictWriter(out, fieldnames=SWEEP_HEADER, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in self.rows:
            w.writerow(r.as_dict())
        return out.getvalue()

    def fractions(self, beta) -> tuple[np.ndarray, np.ndarray]:
        """(m, sat_fraction) along one beta row, sorted by m."""
        rows = sorted((r for r in self.rows if r.beta == float(beta)), key=lambda r: r.m)
        return np.array([r.m for r in rows]), np.array([r.sat_fraction for r in rows])

    def crossing(self, beta) -> float:
        """Clause count where the satisfiable fraction first drops through 0.5 (linear interpolation)."""
        m, f = self.fractions(beta)
        return interpolate_crossing(m, f)


def interpolate_crossing(m, frac, level=0.5) -> float:
    m = np.asarray(m, dtype=np.float64)
    f = np.asarray(frac, dtype=np.float64)
    if f.size == 0 or np.all(np.isnan(f)):
        return math.nan
    if f[0] <= level:
        return float(m[0]) if f[0] == level else math.nan
    for i in range(1, f.size):
        if f[i] <= level:
            return float(m[i - 1] + (f[i - 1] - level) / (f[i - 1] - f[i]) * (m[i] - m[i - 1]))
    return math.nan


def _run_cell(args):
    """All m-grid points for one (beta, trial): one formula, solved at every prefix."""
    n, k, beta, m_grid, seed, solver = args
    formula = trial_formula(n, max(m_grid), k, beta, seed)
    arr = formula.as_array()
    out = []
    for m in m_grid:
        f = Formula.from_array(n, arr[:m])
        status = solver.run(f)
        ratio = moment_ratio(occurrence_counts(f, distinct=False))
        out.append((status, ratio))
    return out


def _map(fn, items, jobs):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items, chunksize=1))
    return [fn(x) for x in items]


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Solve ``spec.trials`` formulas at every (beta, m) grid point.

    UNKNOWN (budget exhausted) and external-solver errors are counted in their
    own columns and left out of ``sat_fraction``. The result does not depend
    on ``jobs``.
    """
    m_grid = sorted(set(spec.m_grid))
    tasks = []
    for beta in spec.beta_grid:
        for t in range(spec.trials):
            seed = trial_seed(spec.base_seed, spec.n, spec.k, beta, t)
            tasks.append((spec.n, spec.k, beta, tuple(m_grid), seed, spec.solver))
    results = _map(_run_cell, tasks, jobs)
    rows = []
    for bi, beta in enumerate(spec.beta_grid):
        cells = results[bi * spec.trials:(bi + 1) * spec.trials]
        for mi, m in enumerate(m_grid):
            statuses = [c[mi][0] for c in cells]
            ratios = [c[mi][1] for c in cells]
            rows.append(
                SweepRow(
                    beta=beta,
                    m=m,
                    n=spec.n,
                    trials=spec.trials,
                    sat=sum(s is Status.SAT for s in statuses),
                    unsat=sum(s is Status.UNSAT for s in statuses),
                    unknown=sum(s is Status.UNKNOWN for s in statuses),
                    errors=sum(s is None for s in statuses),
                    mean_ratio=float(np.mean(ratios)),
                    seed_base=spec.base_seed,
                )
            )
    return SweepResult(spec, rows)


# -- 50% crossing -----------------------------------------------------------

@dataclass
class CrossingResult:
    """Clause count where half of the decided formulas are UNSAT.

    The bracket satisfies UNSAT fraction <= 0.5 at ``m_50 - halfwidth`` and
    > 0.5 at ``m_50 + halfwidth``. ``valid`` is False when more than 5% of all
    probe formulas ended UNKNOWN or errored.
    """

    n: int
    k: int
    beta: float
    m_50: int
    confidence_halfwidth: int
    trials_per_probe: int
    probes: list = field(default_factory=list)
    unknown_fraction: float = 0.0
    valid: bool = True
    base_seed: int = 0

    def as_dict(self):
        return {"n": self.n, "k": self.k, "beta": self.beta, "m_50": self.m_50, "halfwidth": self.confidence_halfwidth}


def _probe(n, k, beta, m, trials, solver, base_seed, jobs):
    spec = SweepSpec(n, k, (beta,), (m,), trials, solver, base_seed)
    return run_sweep(spec, jobs).rows[0]


def find_crossing(
    n,
    k,
    beta,
    trials_per_probe=20,
    solver: SolverSpec | None = None,
    base_seed=0,
    m_start=None,
    rel_tol=0.05,
    jobs=1,
) -> CrossingResult:
    """Locate m_50 by exponential bracketing then bisection on the clause count.

    Each probe is a deterministic mini-sweep of ``trials_per_probe`` formulas;
    bisection stops once the bracket half-width is at most ``rel_tol * m_50``.
    """
    if trials_per_probe < 1:
        raise ValueError("trials_per_probe must be positive")
    if solver is None:
        solver = SolverSpec("two_sat" if k == 2 else "dpll")
    cap = int(counting_bound_ratio(k) * n * 4)
    cache = {}

    def frac(m):
        if m not in cache:
            cache[m] = _probe(n, k, beta, m, trials_per_probe, solver, base_seed, jobs)
        return cache[m].unsat_fraction

    m = max(1, int(m_start if m_start is not None else n))
    if frac(m) > 0.5:
        hi = m
        lo = 0
        while m > 1:
            m = max(1, m // 2)
            if frac(m) <= 0.5:
                lo = m
                break
            hi = m
    else:
        lo = m
        while True:
            m *= 2
            if m > cap:
                raise RuntimeError(f"no UNSAT majority below m = {cap} (counting bound exceeded)")
            if frac(m) > 0.5:
                hi = m
                break
            lo = m
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if (hi - lo) / 2 <= rel_tol * mid:
            break
        if frac(mid) > 0.5:
            hi = mid
        else:
            lo = mid
    m50 = (lo + hi) // 2
    half = max(1, math.ceil((hi - lo) / 2))
    probes = [cache[key] for key in sorted(cache)]
    total = sum(p.trials for p in probes)
    undecided = sum(p.unknown + p.errors for p in probes)
    uf = undecided / total if total else 0.0
    return CrossingResult(
        n, k, beta, m50, half, trials_per_probe, probes, uf, uf <= 0.05, base_seed
    )


def crossings_csv(crossings) -> str:
    out = io.StringIO()
    w = csv.DictWriter(out, fieldnames=CROSSING_HEADER, lineterminator="\n")
    w.writeheader()
    for c in crossings:
        w.writerow(c.as_dict())
    return out.getvalue()


def fit_scaling_exponent(crossings) -> float:
    """Least-squares slope of log m_50 against log n."""
    ns = np.array([c.n for c in crossings], dtype=np.float64)
    ms = np.array([c.m_50 for c in crossings], dtype=np.float64)
    if np.unique(ns).size < 4 or ns.max() / ns.min() < 8:
        raise ValueError("need at least 4 distinct n spanning a factor of 8")
    return float(np.polyfit(np.log(ns), np.log(ms), 1)[0])


# -- exposure diagnostics -------------------------------------------------

def exposure_statistics(n, beta, m, trials=10, starts_per_formula=10, giant_fraction=0.01, base_seed=0, check_walk=False):
    """Outcome frequencies of the implied-literal exposure from random start literals.

    Returns a dict with the fraction of runs ending closed, in contradiction,
    or giant, plus the mean of max X_r. ``check_walk`` re-asserts every
    recorded step against the case increments.
    """
    counts = {o: 0 for o in Outcome}
    max_walks = []
    for t in range(trials):
        seed = trial_seed(base_seed, n, 2, beta, t)
        formula = trial_formula(n, m, 2, beta, seed)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
        vars_ = rng.integers(1, n + 1, size=starts_per_formula)
        signs = rng.choice([-1, 1], size=starts_per_formula)
        for v, s in zip(vars_.tolist(), signs.tolist()):
            tr = find_implied_set(formula, v * s, giant_fraction)
            counts[tr.outcome] += 1
            max_walks.append(tr.max_walk)
            if check_walk:
                for r, case in enumerate(tr.cases):
                    step = tr.walk[r + 1] - tr.walk[r]
                    if step != walk_increment(case, tr.k_negz[r], tr.c_negz[r]):
                        raise AssertionError(f"walk step {r} of case {case} changed X by {step}")
    runs = sum(counts.values())
    return {
        "runs": runs,
        "closed": counts[Outcome.CLOSED] / runs,
        "contradiction": counts[Outcome.CONTRADICTION] / runs,
        "giant": counts[Outcome.GIANT] / runs,
        "mean_max_walk": float(np.mean(max_walks)),
    }
