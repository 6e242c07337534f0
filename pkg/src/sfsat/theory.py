"""Closed-form threshold and small-core quantities for scale-free k-SAT."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, fields

import numpy as np

from .sampler import harmonic, power_law, rejection_probability, zeta


class RegimeError(ValueError):
    """A quantity requested outside the exponent range where it is defined."""


def threshold_2sat(beta: float, n: int) -> float:
    """Clause count above which scale-free 2-SAT is almost surely UNSAT.

    Leading terms only: ``n (1-2b)/(1-b)^2`` for b < 1/2, ``4 n / ln n`` at
    b = 1/2, ``n^(2(1-b)) / ((1-b)^2 zeta(2b))`` for 1/2 < b < 1.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if beta >= 1:
        raise RegimeError("no threshold for beta >= 1")
    if beta < 0.5:
        return n * (1 - 2 * beta) / (1 - beta) ** 2
    if beta == 0.5:
        return 4 * n / math.log(n)
    return n ** (2 * (1 - beta)) / ((1 - beta) ** 2 * zeta(2 * beta))


def threshold_2sat_finite(beta: float, n: int) -> float:
    """Finite-n criterion value m = H_{n,b}^2 / H_{n,2b} (the sum form before asymptotics).

    Obtained by imposing E[K^2]/E[K] = 3 with expected counts 2 m P(x).
    """
    p = power_law(n, beta).pmf()
    return 1.0 / float(np.sum(p * p))


def ratio_threshold(beta: float) -> float:
    """Asymptotic clause/variable ratio (1-2b)/(1-b)^2 for b < 1/2."""
    if not 0 <= beta < 0.5:
        raise RegimeError("a linear threshold exists only for 0 <= beta < 1/2")
    return (1 - 2 * beta) / (1 - beta) ** 2


def satisfiability_lower_ratio(delta: float) -> float:
    """Lower bound (d-1)(d-3)/(d-2)^2 on the 2-SAT threshold in occurrence exponent d > 3."""
    if delta <= 3:
        raise RegimeError("the bound needs delta > 3")
    # (d-1)(d-3) = (d-2)^2 - 1; this form stays finite for huge delta
    g = 1.0 / (delta - 2)
    return 1.0 - g * g


def small_core_clause_probability(n: int, k: int, beta: float) -> float:
    """Probability of one given sign pattern on variables 1..k: (k!)^(1-b) / (2 H_{n,b})^k."""
    if k > n:
        raise ValueError("need k <= n")
    return math.factorial(k) ** (1 - beta) / (2 * harmonic(n, beta)) ** k


def small_core_emergence_probability(k: int, beta: float) -> float:
    """Limit probability that a fixed clause on variables 1..k appears among n^((1-b)k) clauses."""
    return -math.expm1(-(((1 - beta) / 2) ** k) * math.factorial(k) ** (1 - beta))


def core_exponent(k: int, beta: float) -> float:
    """Exponent (1-b)k of the clause count that forces small unsatisfiable cores."""
    return (1 - beta) * k


def optimal_core_radius(k: int, beta: float) -> float:
    """Radius r* = (1 - (1-b)k)^(-1/(1-b)) maximizing the core density; needs b > 1 - 1/k."""
    if beta <= 1 - 1 / k:
        raise RegimeError(f"core density grows without bound for beta <= 1 - 1/k = {1 - 1 / k:g}")
    a = 1 - beta
    if a == 0:
        return math.exp(k)
    return (1 - a * k) ** (-1 / a)


def expected_core_density(n, m, k, beta, r, approx: bool = False, distinct: bool = False):
    """E[|C_r| / r] = (m/r) (H_{r,b} / H_{n,b})^k.

    ``approx=True`` uses ((r^(1-b) - 1) / (n^(1-b) - 1))^k instead, the form
    whose maximizer is :func:`optimal_core_radius`. ``r`` may be an array.

    Both forms count raw k-draws. Generated clauses never repeat a variable,
    and draws confined to 1..r collide far more often than draws over 1..n;
    ``distinct=True`` multiplies by (1 - R_k(r)) / (1 - R_k(n)) to get the
    density of the generator's actual clauses (scalar ``r`` only).
    """
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 1) or np.any(r > n):
        raise ValueError("need 1 <= r <= n")
    if approx:
        a = 1 - beta
        if a == 0:
            frac = np.log(r) / math.log(n)
        else:
            frac = (r**a - 1) / (n**a - 1)
    else:
        Hn = harmonic(n, beta)
        if r.ndim == 0:
            frac = harmonic(int(r), beta) / Hn
        else:
            H = np.cumsum(np.arange(1, int(r.max()) + 1, dtype=np.float64) ** (-beta))
            frac = H[r.astype(np.int64) - 1] / Hn
    out = (m / r) * frac**k
    if distinct:
        if r.ndim != 0:
            raise ValueError("distinct=True needs a scalar r")
        rr = int(r)
        keep_r = 1.0 - rejection_probability(rr, k, beta).coincidence_probability if rr >= k else 0.0
        out = out * keep_r / (1.0 - rejection_probability(n, k, beta).coincidence_probability)
    return float(out) if np.ndim(out) == 0 else out


def counting_bound(n, m, k) -> float:
    """Natural log of the expected number of satisfying assignments, 2^n (1 - 2^-k)^m."""
    return n * math.log(2) + m * math.log1p(-(2.0**-k))


def counting_bound_ratio(k) -> float:
    """Sufficient UNSAT density 2^k ln 2 (the first-moment bound via ln(1-x) < -x)."""
    return 2.0**k * math.log(2)


def first_moment_ratio(k) -> float:
    """Density where the expected number of solutions crosses 1: ln 2 / -ln(1 - 2^-k)."""
    return math.log(2) / -math.log1p(-(2.0**-k))


def regime_of(beta: float) -> str:
    if beta < 0.5:
        return "beta<1/2"
    if beta == 0.5:
        return "beta=1/2"
    if beta < 1:
        return "1/2<beta<1"
    if beta == 1:
        return "beta=1"
    return "beta>1"


@dataclass(frozen=True)
class ThresholdReport:
    n: int
    k: int
    beta: float
    regime: str
    core_exponent: float
    core_regime: bool
    core_scale: float
    counting_bound_ratio: float
    first_moment_ratio: float
    emergence_probability: float | None = None
    m_threshold: float | None = None
    m_threshold_finite: float | None = None
    ratio_threshold: float | None = None
    lower_ratio: float | None = None
    r_star: float | None = None

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_text(self) -> str:
        rows = [(k, v) for k, v in self.as_dict().items() if v is not None]
        width = max(len(k) for k, _ in rows)
        lines = []
        for k, v in rows:
            if isinstance(v, float):
                v = f"{v:.6g}"
            lines.append(f"{k:<{width}}  {v}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        d = self.as_dict()
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(list(d))
        w.writerow(["" if v is None else v for v in d.values()])
        return out.getvalue()


def build_report(n: int, k: int, beta: float) -> ThresholdReport:
    """Every applicable closed-form quantity for (n, k, beta); inapplicable ones stay None."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    regime = regime_of(beta)
    core_reg = beta > 1 - 1 / k
    extra = {}
    if beta < 1:
        extra["emergence_probability"] = small_core_emergence_probability(k, beta)
    if k == 2 and beta < 1:
        extra["m_threshold"] = threshold_2sat(beta, n)
        extra["m_threshold_finite"] = threshold_2sat_finite(beta, n)
        if beta < 0.5:
            extra["ratio_threshold"] = ratio_threshold(beta)
            if beta > 0:
                extra["lower_ratio"] = satisfiability_lower_ratio(1 / beta + 1)
    if core_reg:
        extra["r_star"] = optimal_core_radius(k, beta)
    return ThresholdReport(
        n=n,
        k=k,
        beta=beta,
        regime=regime,
        core_exponent=core_exponent(k, beta),
        core_regime=core_reg,
        core_scale=float(n) ** core_exponent(k, beta),
        counting_bound_ratio=counting_bound_ratio(k),
        first_moment_ratio=first_moment_ratio(k),
        **extra,
    )
