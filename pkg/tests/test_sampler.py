import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from sfsat import _philox
from sfsat.generator import count_rejections
from sfsat.sampler import (
    APPROX,
    EXACT,
    approx_cdf,
    harmonic,
    power_law,
    rejection_probability,
    sample_variable,
    sample_variable_approx,
    zeta,
    zeta_unit_interval,
)

mpmath = pytest.importorskip("mpmath")


def direct_sum(n, beta):
    return math.fsum(i ** -beta for i in range(1, n + 1))


# -- harmonic / zeta ----------------------------------------------------------

def test_harmonic_small():
    assert harmonic(4, 0) == 4
    assert harmonic(4, 1) == pytest.approx(25 / 12, rel=1e-15)


def test_harmonic_matches_asymptotic_form():
    value = harmonic(10**4, 0.5)
    assert value == pytest.approx(zeta_unit_interval(0.5) + 200 + 0.005, rel=1e-6)
    assert value == pytest.approx(direct_sum(10**4, 0.5), rel=1e-12)


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.82])
def test_harmonic_vs_direct_sum(beta):
    assert harmonic(10**4, beta) == pytest.approx(direct_sum(10**4, beta), rel=1e-6)


def test_harmonic_large_n_uses_euler_maclaurin():
    n = 10**8
    b = 0.5
    expected = float(mpmath.zeta(b) + mpmath.mpf(n) ** (1 - b) / (1 - b) + mpmath.mpf(n) ** (-b) / 2)
    assert harmonic(n, b) == pytest.approx(expected, rel=1e-12)
    assert harmonic(n, 1.0) == pytest.approx(float(mpmath.euler + mpmath.log(n)), rel=1e-12)


def test_zeta_half():
    assert zeta_unit_interval(0.5) == pytest.approx(-1.4603545, abs=1e-7)


@pytest.mark.parametrize("s", [0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1.4, 1.64, 2.0, 3.0])
def test_zeta_against_mpmath(s):
    assert zeta(s) == pytest.approx(float(mpmath.zeta(s)), rel=1e-10)


def test_zeta_negative_on_unit_interval():
    for b in np.linspace(0.05, 0.95, 19):
        assert zeta_unit_interval(float(b)) < 0


def test_zeta_stated_limit_oracle():
    # limit of the tail-corrected partial sum at N = 10**6
    N = 10**6
    b = 0.5
    partial = direct_sum(N, b) - N ** (1 - b) / (1 - b) - N ** (-b) / 2
    assert zeta_unit_interval(b) == pytest.approx(partial, abs=1e-9)


def test_zeta_consistency_rearranged():
    value = harmonic(10**6, 0.3) - (10**6) ** 0.7 / 0.7 - 0.5 * 10**-1.8
    assert value == pytest.approx(zeta_unit_interval(0.3), abs=1e-6)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.5])
def test_zeta_domain(bad):
    with pytest.raises(ValueError):
        zeta_unit_interval(bad)


# -- exact table --------------------------------------------------------------

@given(st.integers(1, 3000), st.floats(0, 2.5))
@settings(max_examples=60, deadline=None)
def test_table_invariants(n, beta):
    d = power_law(n, beta)
    cum = d.cumulative
    assert abs(cum[-1] - 1) < 1e-12
    assert np.all(np.diff(cum) > 0)
    steps = np.diff(np.concatenate([[0.0], cum]))
    assert np.max(np.abs(steps - np.arange(1, n + 1) ** -beta / d.normalization)) < 1e-12
    assert abs(steps.sum() - 1) < 1e-12
    if beta == 0:
        assert d.normalization == n


def test_sample_variable_examples():
    d = power_law(10, 0)
    assert sample_variable(d, 0.05) == 1
    assert sample_variable(d, 0.95) == 10
    d = power_law(2, 1)
    assert d.pmf().tolist() == pytest.approx([2 / 3, 1 / 3])
    assert sample_variable(d, 0.5) == 1
    assert sample_variable(d, 0.7) == 2


@given(st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True), st.floats(0, 2))
@settings(max_examples=200, deadline=None)
def test_sample_monotone_in_u(u1, u2, beta):
    d = power_law(500, beta)
    lo, hi = sorted((u1, u2))
    assert 1 <= sample_variable(d, lo) <= sample_variable(d, hi) <= 500


def test_chi_square_sampler_law():
    n, beta, draws = 1000, 0.5, 10**6
    d = power_law(n, beta)
    u = _philox.words_to_uniform(_philox.clause_words(_philox.stream_key(11), np.arange(draws), 0, 1))[:, 0]
    counts = np.bincount(sample_variable(d, u), minlength=n + 1)[1:]
    expected = draws * np.arange(1, n + 1) ** -beta / harmonic(n, beta)
    _, p = stats.chisquare(counts, expected)
    assert p > 0.001


# -- approximate inverse -------------------------------------------------------

@pytest.mark.parametrize("n, beta", [(10**4, 0.3), (10**5, 0.82), (10**6, 0.5)])
def test_approx_u_zero(n, beta):
    assert sample_variable_approx(power_law(n, beta, APPROX), 0.0) == 1


def test_approx_near_zero_beta_is_uniform():
    # zeta(0) = -1/2, so the limit form is floor((n - 1/2) u + 1/2) + 1: uniform up to one index
    n = 10**4
    d = power_law(n, 1e-9, APPROX)
    u = np.random.default_rng(2).random(10**5)
    x = sample_variable_approx(d, u)
    limit = np.minimum(np.floor((n - 0.5) * u + 0.5).astype(int) + 1, n)
    assert np.array_equal(x, limit)
    assert np.max(np.abs(x - (np.floor(n * u).astype(int) + 1))) <= 1


def test_approx_clamped_and_domain():
    d = power_law(10**4, 0.5, APPROX)
    assert sample_variable_approx(d, 1 - 1e-16) == 10**4
    with pytest.raises(ValueError):
        power_law(10**4, 1.0, APPROX)
    with pytest.raises(ValueError):
        sample_variable_approx(power_law(10**4, 0.0), 0.5)
    with pytest.warns(UserWarning):
        sample_variable_approx(power_law(100, 0.5, APPROX), 0.3)
    assert power_law(100, 0.5).mode == EXACT


def test_approx_total_variation():
    n, beta = 10**6, 0.5
    exact = power_law(n, beta)
    approx = power_law(n, beta, APPROX)
    # law implied by the closed form, against the exact law
    pa = np.diff(approx_cdf(approx, np.arange(0, n + 1)))
    assert 0.5 * np.abs(pa - exact.pmf()).sum() < 0.01
    # empirical law of 10**6 draws, on doubling bins to keep sampling noise small
    u = np.random.default_rng(5).random(10**6)
    x = sample_variable_approx(approx, u)
    edges = np.append(2 ** np.arange(0, 20), n + 1)
    emp = np.histogram(x, bins=edges)[0] / x.size
    ref = np.add.reduceat(exact.pmf(), edges[:-1] - 1)
    assert 0.5 * np.abs(emp - ref).sum() < 0.01


# -- rejection probability -----------------------------------------------------

def brute_rejection(n, k, beta):
    p = np.arange(1, n + 1) ** -float(beta)
    p /= p.sum()
    total = 0.0
    for tup in itertools.product(range(n), repeat=k):
        if len(set(tup)) < k:
            total += float(np.prod(p[list(tup)]))
    return total


def test_rejection_examples():
    assert rejection_probability(50, 1, 0.5).coincidence_probability == 0
    assert rejection_probability(100, 2, 0).coincidence_probability == pytest.approx(0.01, rel=1e-12)


@pytest.mark.parametrize("n, k, beta", [(5, 2, 0.5), (6, 3, 0.82), (7, 4, 0), (5, 5, 1.2), (4, 3, 0.3)])
def test_rejection_brute_force(n, k, beta):
    est = rejection_probability(n, k, beta)
    assert est.coincidence_probability == pytest.approx(brute_rejection(n, k, beta), abs=1e-12)
    assert len(est.power_sums) == k


def test_rejection_uniform_closed_form():
    n, k = 1000, 4
    expected = 1 - math.perm(n, k) / n**k
    assert rejection_probability(n, k, 0).coincidence_probability == pytest.approx(expected, rel=1e-10)


def test_rejection_monotone_and_bounded():
    for beta in (0, 0.5, 0.82, 1.5):
        r = [rejection_probability(200, k, beta).coincidence_probability for k in range(1, 8)]
        assert r[0] == 0
        assert all(0 <= x <= 1 for x in r)
        assert all(b >= a - 1e-15 for a, b in zip(r, r[1:]))


@pytest.mark.parametrize("k", [2, 3, 4, 5])
@pytest.mark.parametrize("beta", [0, 0.5, 0.82])
def test_rejection_vanishes_at_large_n(k, beta):
    assert rejection_probability(10**6, k, beta).coincidence_probability < 0.02


def test_rejection_r3_matches_generator():
    R = rejection_probability(10**6, 3, 0.5).coincidence_probability
    assert R < 0.01
    bad, tot = count_rejections(10**6, 3, 0.5, 10**5, seed=3)
    se = math.sqrt(R * (1 - R) / tot)
    assert abs(bad / tot - R) < 2 * se


def test_rejection_matches_generator_grid():
    # 24 cells: 3.5 SE per cell keeps the family-wise false alarm near 1%,
    # and the z-scores together must look like standard normals
    zs = []
    for n in (10**4, 10**5):
        for k in (2, 3, 4):
            for beta in (0, 0.25, 0.5, 0.82):
                R = rejection_probability(n, k, beta).coincidence_probability
                bad, tot = count_rejections(n, k, beta, 2 * 10**5, seed=17)
                zs.append((bad / tot - R) / math.sqrt(R * (1 - R) / tot))
    zs = np.array(zs)
    assert np.all(np.abs(zs) < 3.5), zs
    assert stats.chi2.sf(np.sum(zs**2), zs.size) > 0.001
