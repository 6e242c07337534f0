"""Power-law variable sampling, P(i) proportional to i**-beta on 1..n."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

EXACT = "exact-table"
APPROX = "approximate-inverse"

#: largest n summed term by term; beyond it the asymptotic forms are used
DIRECT_SUM_LIMIT = 10**7
_CHUNK = 2**20

# B_2, B_4, B_6, B_8 over (2j)!
_BERNOULLI_TERMS = (1 / 6 / 2, -1 / 30 / 24, 1 / 42 / 720, -1 / 30 / 40320)


def _power_sum(n, s):
    """sum_{i=1}^n i**-s by chunked pairwise summation."""
    total = 0.0
    for start in range(1, n + 1, _CHUNK):
        i = np.arange(start, min(start + _CHUNK, n + 1), dtype=np.float64)
        total += float(np.sum(i ** (-s)))
    return total


def _zeta_em(s, N):
    # tail-corrected partial sum; s != 1
    head = _power_sum(N, s)
    val = head - N ** (1 - s) / (1 - s) - 0.5 * N ** (-s)
    rising = s
    for j, b in enumerate(_BERNOULLI_TERMS):
        val += b * rising * N ** (-s - 2 * j - 1)
        rising *= (s + 2 * j + 1) * (s + 2 * j + 2)
    return val


@lru_cache(maxsize=256)
def zeta(s: float, tol: float = 1e-10) -> float:
    """Riemann zeta for real ``s != 1`` (analytic continuation below 1).

    Euler-Maclaurin corrected partial sums with N grown geometrically until
    two successive estimates differ by less than ``tol``.
    """
    s = float(s)
    if s == 1.0:
        raise ValueError("zeta has a pole at s = 1")
    if s < 0:
        raise ValueError("only s >= 0 is supported")
    prev = _zeta_em(s, 16)
    N = 16
    while True:
        N *= 4
        cur = _zeta_em(s, N)
        if abs(cur - prev) < tol or N > 2**24:
            return cur
        prev = cur


def zeta_unit_interval(beta: float) -> float:
    """zeta(beta) for 0 < beta < 1, where the defining series diverges."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    return zeta(beta)


def harmonic(n: int, beta: float) -> float:
    """Generalized harmonic number H_{n,beta} = sum_{i=1}^n i**-beta.

    Summed directly up to ``DIRECT_SUM_LIMIT``; above it the Euler-Maclaurin
    asymptotic ``zeta(beta) + n**(1-beta)/(1-beta) + n**-beta/2`` is used,
    or ``gamma + log n`` at beta = 1.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    if beta == 0:
        return float(n)
    if n <= DIRECT_SUM_LIMIT:
        return _power_sum(n, beta)
    if beta == 1:
        return float(np.euler_gamma + math.log(n))
    return zeta(beta) + n ** (1 - beta) / (1 - beta) + 0.5 * n ** (-beta)


@lru_cache(maxsize=32)
def _table(n, beta):
    w = np.arange(1, n + 1, dtype=np.float64) ** (-beta)
    cum = np.cumsum(w)
    total = float(cum[-1])
    cum /= total
    cum[-1] = 1.0
    cum.flags.writeable = False
    return total, cum


@dataclass(frozen=True, eq=False)
class PowerLawDist:
    """Distribution of variable indices with P(i) = i**-beta / H_{n,beta}.

    Build with :func:`power_law`. ``cumulative[i-1]`` is P(X <= i) and is only
    present in exact-table mode.
    """

    n: int
    beta: float
    normalization: float
    mode: str = EXACT
    cumulative: np.ndarray | None = None

    def pmf(self, i=None):
        """Exact probabilities of the indices ``i`` (all of 1..n by default)."""
        if i is None:
            i = np.arange(1, self.n + 1)
        return np.asarray(i, dtype=np.float64) ** (-self.beta) / self.normalization

    def sample(self, u):
        if self.mode == EXACT:
            return sample_variable(self, u)
        return sample_variable_approx(self, u)


def power_law(n: int, beta: float, mode: str | None = None) -> PowerLawDist:
    """Construct the sampler for ``n`` variables and exponent ``beta``.

    ``mode`` defaults to exact-table for n <= 10**7 and to the closed-form
    approximate inverse above that.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if mode is None:
        mode = EXACT if n <= DIRECT_SUM_LIMIT else APPROX
    if mode == EXACT:
        total, cum = _table(n, float(beta))
        if beta == 0:
            total = float(n)
        return PowerLawDist(n, float(beta), total, EXACT, cum)
    if mode == APPROX:
        if not 0 < beta < 1:
            raise ValueError("the approximate inverse needs 0 < beta < 1")
        return PowerLawDist(n, float(beta), harmonic(n, beta), APPROX, None)
    raise ValueError(f"unknown sampler mode {mode!r}")


def sample_variable(dist: PowerLawDist, u):
    """Smallest index i with cumulative[i] > u (binary search).

    Accepts a scalar or an array of uniforms in [0, 1).
    """
    if dist.cumulative is None:
        raise ValueError("sample_variable needs an exact-table distribution")
    idx = np.searchsorted(dist.cumulative, u, side="right") + 1
    idx = np.minimum(idx, dist.n)
    return int(idx) if np.ndim(idx) == 0 else idx


def sample_variable_approx(dist: PowerLawDist, u):
    """Closed-form inverse of the continuous approximation of the CDF.

    ``floor(((n**(1-b) + (1-b) zeta(b)) u - (1-b) zeta(b)) ** (1/(1-b))) + 1``,
    clamped to 1..n. Reasonable only for large n.
    """
    b = dist.beta
    if not 0 < b < 1:
        raise ValueError("the approximate inverse needs 0 < beta < 1")
    if dist.n < 10**4:
        warnings.warn("approximate inverse sampling is biased for n < 10**4", stacklevel=2)
    a = 1.0 - b
    z = a * zeta_unit_interval(b)
    inner = (dist.n ** a + z) * np.asarray(u, dtype=np.float64) - z
    x = np.floor(np.maximum(inner, 0.0) ** (1.0 / a)) + 1
    x = np.clip(x, 1, dist.n).astype(np.int64)
    return int(x) if x.ndim == 0 else x


def approx_cdf(dist: PowerLawDist, x):
    """CDF implied by the approximate inverse: P(X <= x) for integer x."""
    a = 1.0 - dist.beta
    z = a * zeta_unit_interval(dist.beta)
    x = np.asarray(x, dtype=np.float64)
    cdf = (x ** a + z) / (dist.n ** a + z)
    return np.clip(np.where(x >= dist.n, 1.0, cdf), 0.0, 1.0)


@dataclass(frozen=True)
class RejectionEstimate:
    k: int
    coincidence_probability: float
    power_sums: np.ndarray


def rejection_probability(n: int, k: int, beta: float) -> RejectionEstimate:
    """Probability that k i.i.d. draws repeat some variable (clause rejection).

    Solves the generalized birthday ("surname") recurrence
    ``r_k = sum_j (-1)**(j-1) (k-1)!/(k-j)! P_j r_{k-j}`` with ``r_0 = 1`` and
    ``P_j = sum_i p_i**j``.
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    p = power_law(n, beta).pmf() if n <= DIRECT_SUM_LIMIT else None
    if p is None:
        raise ValueError("exact power sums need n <= 10**7")
    sums = np.array([float(np.sum(p**j)) for j in range(1, k + 1)])
    sums[0] = 1.0  # exact; the float sum can miss by an ulp
    r = [1.0]
    for t in range(1, k + 1):
        acc = 0.0
        for j in range(1, t + 1):
            coef = factorial(t - 1) // factorial(t - j)
            acc += (-1) ** (j - 1) * coef * sums[j - 1] * r[t - j]
        r.append(acc)
    R = min(max(1.0 - r[k], 0.0), 1.0)
    return RejectionEstimate(k, R, sums)
