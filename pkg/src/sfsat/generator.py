"""Scale-free random k-SAT generation.

Each clause draws k variables from the power-law sampler and flips each sign
with probability 1/2; a clause with a repeated variable is discarded whole
and redrawn. Randomness comes from a counter-based stream, so clause ``j`` is
a pure function of ``(seed, j)`` no matter how the rows are batched.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _philox
from .formula import Formula
from .sampler import PowerLawDist, harmonic, power_law

MAX_REJECTIONS = 10**6


class GenerationError(RuntimeError):
    """Raised when a clause keeps colliding (pathological n, k, beta)."""


class GeneratorWarning(UserWarning):
    pass


@dataclass(frozen=True)
class GeneratorParams:
    n: int
    m: int
    k: int
    beta: float
    seed: int = 0
    sampler_mode: str | None = None

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def density(self) -> float:
        """Clause/variable ratio C = m/n."""
        return self.m / self.n

    def distribution(self) -> PowerLawDist:
        return power_law(self.n, self.beta, self.sampler_mode)

    def metadata(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "k": self.k,
            "beta": self.beta,
            "seed": self.seed,
            "sampler": self.distribution().mode if self.sampler_mode is None else self.sampler_mode,
        }


def generate_clause(dist: PowerLawDist, k: int, rng, max_rejections=MAX_REJECTIONS) -> tuple[int, ...]:
    """Draw one clause from any uniform source ``rng`` (``rng.random()`` in [0, 1)).

    Reference path for the batched generator; used mainly by tests.
    """
    if not 1 <= k <= dist.n:
        raise ValueError("need 1 <= k <= n")
    for _ in range(max_rejections):
        lits = []
        for _ in range(k):
            v = int(dist.sample(rng.random()))
            lits.append(v if rng.random() < 0.5 else -v)
        if len({abs(l) for l in lits}) == k:
            return tuple(lits)
    raise GenerationError(f"{max_rejections} consecutive rejections for n={dist.n}, k={k}, beta={dist.beta}")


def _has_repeat(vars_):
    if vars_.shape[1] < 2:
        return np.zeros(vars_.shape[0], dtype=bool)
    s = np.sort(vars_, axis=1)
    return np.any(s[:, 1:] == s[:, :-1], axis=1)


def generate_clauses(dist: PowerLawDist, k: int, rows, key, max_rejections=MAX_REJECTIONS):
    """Generate the clauses with the given row indices.

    Returns ``(clauses, attempts)``: an ``(len(rows), k)`` literal array and the
    total number of k-draw attempts (accepted plus rejected).
    """
    rows = np.asarray(rows, dtype=np.int64)
    out = np.empty((rows.size, k), dtype=np.int64)
    pending = np.arange(rows.size)
    attempts = 0
    attempt = 0
    while pending.size:
        if attempt >= max_rejections:
            raise GenerationError(
                f"{max_rejections} consecutive rejections for n={dist.n}, k={k}, beta={dist.beta}"
            )
        words = _philox.clause_words(key, rows[pending], attempt, k)
        vars_ = np.asarray(dist.sample(_philox.words_to_uniform(words)), dtype=np.int64).reshape(-1, k)
        lits = vars_ * _philox.words_to_sign(words)
        bad = _has_repeat(vars_)
        attempts += pending.size
        out[pending[~bad]] = lits[~bad]
        pending = pending[bad]
        attempt += 1
    return out, attempts


def _warn_regime(params):
    if params.beta >= 1:
        warnings.warn(
            f"beta={params.beta} >= 1: variable probabilities do not vanish with n",
            GeneratorWarning,
            stacklevel=3,
        )
    if params.k * params.k >= params.n:
        warnings.warn(
            f"k**2 >= n (k={params.k}, n={params.n}): clause rejections will be frequent",
            GeneratorWarning,
            stacklevel=3,
        )


def generate_formula(params: GeneratorParams, chunk_size: int | None = None) -> Formula:
    """Generate ``params.m`` independent clauses.

    ``chunk_size`` only bounds memory; the output is identical for every value.
    The number of draw attempts is recorded in ``metadata['attempts']``.
    """
    _warn_regime(params)
    dist = params.distribution()
    key = _philox.stream_key(params.seed)
    chunk = params.m if chunk_size is None else max(1, int(chunk_size))
    parts = []
    attempts = 0
    for start in range(0, params.m, chunk):
        rows = np.arange(start, min(start + chunk, params.m))
        part, a = generate_clauses(dist, params.k, rows, key)
        parts.append(part)
        attempts += a
    meta = params.metadata()
    meta["attempts"] = attempts
    return Formula.from_array(params.n, np.concatenate(parts), meta)


def count_rejections(n, k, beta, attempts, seed=0):
    """Count k-draw attempts that repeat a variable.

    Uses the generator's stream layout (first attempt of rows
    ``0..attempts-1`` under stream 1 of ``seed``). Returns ``(rejected, attempts)``.
    """
    dist = power_law(n, beta)
    key = _philox.stream_key(seed, 1)
    rejected = 0
    batch = 2**18
    for start in range(0, attempts, batch):
        rows = np.arange(start, min(start + batch, attempts))
        words = _philox.clause_words(key, rows, 0, k)
        vars_ = np.asarray(dist.sample(_philox.words_to_uniform(words))).reshape(-1, k)
        rejected += int(_has_repeat(vars_).sum())
    return rejected, attempts


def expected_occurrences(i, params: GeneratorParams, exact: bool = False):
    """Expected occurrences of variable i: C k (1-beta) (i/n)**-beta.

    That form replaces H_{n,beta} by n**(1-beta)/(1-beta), which drops the
    zeta(beta) term; at n = 1e5, beta = 0.82 it undershoots by about 13%.
    ``exact=True`` returns k m i**-beta / H_{n,beta} instead (the rejection
    correction is of order R_k and ignored).
    """
    b = params.beta
    i = np.asarray(i, dtype=np.float64)
    if exact:
        out = params.k * params.m * i ** (-b) / harmonic(params.n, b)
    else:
        if not 0 < b < 1:
            raise ValueError("expected_occurrences needs 0 < beta < 1")
        out = params.density * params.k * (1 - b) * (i / params.n) ** (-b)
    return float(out) if out.ndim == 0 else out
