"""Occurrence statistics, percolation criteria and power-law exponent fits."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .formula import Formula, distinct_clause_count
from .sampler import power_law


class FitError(ValueError):
    """Too little data in the requested fit range."""


@dataclass(frozen=True, eq=False)
class OccurrenceStats:
    """Per-literal and per-variable occurrence counts of a formula.

    ``positive[x-1]`` is k_x, ``negative[x-1]`` is k_{-x}; counts may be
    real-valued when they hold expectations instead of observations.
    """

    n: int
    m: int
    positive: np.ndarray
    negative: np.ndarray
    distinct_clause_count: int | None = None

    @property
    def variable_counts(self) -> np.ndarray:
        """K_x = k_x + k_{-x}."""
        return self.positive + self.negative

    @property
    def size(self):
        return float(self.variable_counts.sum())

    @property
    def mean_K(self) -> float:
        return float(self.variable_counts.sum()) / self.n

    @property
    def mean_K2(self) -> float:
        K = self.variable_counts.astype(np.float64)
        return float(np.dot(K, K)) / self.n

    def literal_count(self, lit: int):
        return self.positive[lit - 1] if lit > 0 else self.negative[-lit - 1]

    @property
    def literal_counts(self) -> dict[int, int]:
        out = {}
        for x in range(1, self.n + 1):
            out[x] = self.positive[x - 1]
            out[-x] = self.negative[x - 1]
        return out

    def degree_histogram(self) -> dict[int, int]:
        """Map K -> number of variables occurring exactly K times."""
        K = np.asarray(self.variable_counts, dtype=np.int64)
        values, counts = np.unique(K, return_counts=True)
        return dict(zip(values.tolist(), counts.tolist()))


def occurrence_counts(formula: Formula, distinct: bool = True) -> OccurrenceStats:
    lits = formula.literals
    n = formula.n
    pos = np.bincount(lits[lits > 0], minlength=n + 1)[1:]
    neg = np.bincount(-lits[lits < 0], minlength=n + 1)[1:]
    dc = distinct_clause_count(formula) if distinct else None
    return OccurrenceStats(n, formula.m, pos, neg, dc)


def pooled_stats(stats_list) -> OccurrenceStats:
    """Concatenate the variables of several formulas into one population."""
    stats_list = list(stats_list)
    return OccurrenceStats(
        sum(s.n for s in stats_list),
        sum(s.m for s in stats_list),
        np.concatenate([s.positive for s in stats_list]),
        np.concatenate([s.negative for s in stats_list]),
        None,
    )


def expected_occurrence_stats(n, m, k, beta) -> OccurrenceStats:
    """Expected counts k_x = k_{-x} = k m P(x) / 2 under the model (no rejection correction)."""
    p = power_law(n, beta).pmf()
    half = k * m * p / 2.0
    return OccurrenceStats(n, m, half, half.copy(), None)


def moment_ratio(stats: OccurrenceStats) -> float:
    """E[K^2] / E[K] over variables 1..n."""
    if stats.size <= 0:
        raise ValueError("empty formula has no moment ratio")
    return stats.mean_K2 / stats.mean_K


def criterion_literals(stats: OccurrenceStats) -> float:
    """sum over the 2n literals i of k_i (k_{-i} - 1)."""
    kp = stats.positive.astype(np.float64)
    kn = stats.negative.astype(np.float64)
    return float(np.sum(kp * (kn - 1)) + np.sum(kn * (kp - 1)))


def criterion_variables(stats: OccurrenceStats) -> float:
    """sum over variables of K (K - 3); positive means above the percolation point."""
    K = stats.variable_counts.astype(np.float64)
    return float(np.dot(K, K - 3))


# -- normalized rank profile ----------------------------------------------

@dataclass(frozen=True, eq=False)
class NormalizedProfile:
    """Rank profile (x_j, phi_j) = (j/n, n K_(j) / sum K) with K sorted descending."""

    x: np.ndarray
    phi: np.ndarray

    @property
    def points(self):
        return list(zip(self.x.tolist(), self.phi.tolist()))

    def integral(self) -> float:
        """Trapezoidal area under the step function phi on (0, 1]."""
        n = self.x.size
        edges = np.repeat(np.arange(n + 1) / n, 2)[1:-1]
        heights = np.repeat(self.phi, 2)
        return float(np.trapezoid(heights, edges))

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["x", "phi"])
        for x, p in zip(self.x.tolist(), self.phi.tolist()):
            w.writerow([repr(x), repr(p)])
        return out.getvalue()


def empirical_profile(stats: OccurrenceStats) -> NormalizedProfile:
    K = np.sort(np.asarray(stats.variable_counts, dtype=np.float64))[::-1]
    total = K.sum()
    if total <= 0:
        raise ValueError("empty formula has no profile")
    n = K.size
    return NormalizedProfile(np.arange(1, n + 1) / n, n * K / total)


def theoretical_profile(x, beta, n=None):
    """Limit profile (1-beta) x**-beta, or its finite-n form when ``n`` is given."""
    x = np.asarray(x, dtype=np.float64)
    if n is None:
        return (1 - beta) * x ** (-beta)
    j = np.maximum(np.floor(n * x + 1e-9), 1)  # guard j/n * n rounding below j
    return n * j ** (-beta) / power_law(n, beta).normalization


# -- exponent fits --------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    """Result of a log-log least-squares fit.

    ``beta_hat`` and ``delta_hat`` are linked by delta = 1/beta + 1; only the
    one named by ``measured`` comes from the data, the other is converted.
    """

    beta_hat: float
    delta_hat: float
    fit_range: tuple
    residual: float
    measured: str
    npoints: int

    def consistency_gap(self, other: "FitResult") -> float:
        """|delta measured here - (1/beta_hat(other) + 1)| style cross-check."""
        if self.measured == "delta":
            return abs(self.delta_hat - delta_from_beta(other.beta_hat))
        return abs(other.delta_hat - delta_from_beta(self.beta_hat))


def delta_from_beta(beta):
    return math.inf if beta == 0 else 1.0 / beta + 1.0


def beta_from_delta(delta):
    return math.inf if delta == 1 else 1.0 / (delta - 1.0)


def _line(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icept)
    return float(slope), float(icept), float(np.sqrt(np.mean(resid**2)))


def fit_beta(profile: NormalizedProfile, x_min: float | None = None, npoints: int = 200) -> FitResult:
    """Slope of log phi against log x on x >= x_min (default 10/n); beta_hat = -slope.

    The fit uses ``npoints`` ranks spaced geometrically over [x_min, 1] so
    every decade of x weighs the same. With all ranks the high-x end, where
    counts are small and Poisson noise bends the sorted profile, would
    dominate the fit.
    """
    n = profile.x.size
    if x_min is None:
        x_min = 10.0 / n
    if not 0 < x_min < 1:
        raise ValueError("x_min must lie in (0, 1)")
    j = np.unique(np.ceil(np.geomspace(x_min * n, n, npoints)).astype(np.int64)) - 1
    j = j[(j >= 0) & (j < n)]
    j = j[profile.phi[j] > 0]
    if j.size < 10:
        raise FitError(f"only {j.size} usable profile points with x >= {x_min}")
    slope, _, res = _line(np.log(profile.x[j]), np.log(profile.phi[j]))
    b = -slope
    return FitResult(b, delta_from_beta(b), (float(x_min), 1.0), res, "beta", int(j.size))


def default_tail_start(n, beta) -> float:
    """Larger of sqrt(n log n) and (n^2 log n)^(beta/(2+beta)), the power-law onset bounds."""
    ln = math.log(n)
    return max(math.sqrt(n * ln), (n * n * ln) ** (beta / (2 + beta)))


def log_binned_histogram(counts, K_min, ratio=1.3):
    """Density of integer counts >= K_min in geometric bins.

    Returns ``(centers, density, nvars)`` for nonempty bins, where density is
    the number of variables per integer value of K inside the bin.
    """
    K = np.asarray(counts, dtype=np.int64)
    K = K[K >= K_min]
    if K.size == 0:
        return np.array([]), np.array([]), np.array([], dtype=np.int64)
    lo = float(K_min)
    edges = [math.ceil(lo)]
    top = int(K.max())
    while edges[-1] <= top:
        nxt = max(edges[-1] + 1, math.ceil(edges[-1] * ratio))
        edges.append(nxt)
    edges = np.array(edges, dtype=np.int64)
    hist, _ = np.histogram(K, bins=edges)
    width = np.diff(edges)  # integers in [lo, hi)
    centers = np.sqrt(edges[:-1] * (edges[1:] - 1).clip(min=edges[:-1]))
    keep = hist > 0
    return centers[keep], hist[keep] / width[keep], hist[keep]


def fit_delta_tail(stats: OccurrenceStats, K_min: float | str | None = None, beta=None, ratio=1.3) -> FitResult:
    """Exponent delta of P(K) ~ K**-delta from the log-binned upper tail.

    ``K_min`` defaults to max(10, 3 E[K]), past the Poisson bulk around the
    mean. ``K_min="asymptotic"`` uses :func:`default_tail_start` instead,
    which needs ``beta``; at desk-scale n that bound leaves only a handful of
    bins.
    """
    if K_min is None:
        K_min = max(10.0, 3.0 * stats.mean_K)
    elif K_min == "asymptotic":
        if beta is None:
            raise ValueError("the asymptotic K_min needs beta")
        K_min = default_tail_start(stats.n, beta)
    if K_min < 1:
        raise ValueError("K_min must be at least 1")
    centers, density, nv = log_binned_histogram(stats.variable_counts, K_min, ratio)
    if centers.size < 5:
        raise FitError(f"only {centers.size} nonempty bins above K_min={K_min:g}")
    slope, _, res = _line(np.log(centers), np.log(density))
    d = -slope
    return FitResult(beta_from_delta(d), d, (float(K_min), float(centers[-1])), res, "delta", int(centers.size))


# -- CSV exports ----------------------------------------------------------

def histogram_csv(stats: OccurrenceStats) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["K", "count"])
    for K, c in sorted(stats.degree_histogram().items()):
        w.writerow([K, c])
    return out.getvalue()


CRITERIA_HEADER = ["n", "m", "k", "beta", "E_K", "E_K2", "ratio", "Q_lit", "Q_var"]


def criteria_row(stats: OccurrenceStats, k=None, beta=None) -> dict:
    return {
        "n": stats.n,
        "m": stats.m,
        "k": "" if k is None else k,
        "beta": "" if beta is None else beta,
        "E_K": stats.mean_K,
        "E_K2": stats.mean_K2,
        "ratio": moment_ratio(stats),
        "Q_lit": criterion_literals(stats),
        "Q_var": criterion_variables(stats),
    }


def criteria_csv(rows) -> str:
    out = io.StringIO()
    w = csv.DictWriter(out, fieldnames=CRITERIA_HEADER, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return out.getvalue()
