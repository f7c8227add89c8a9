from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from primediff import hlmodel as hl
from primediff.diffcount import count_differences
from primediff.errors import DomainError


def riemann_I(x, d, step=1e-2):
    t = np.arange(2.0 + step / 2, x - d, step)
    return float(np.sum(1.0 / (np.log(t) * np.log(t + d)))) * step


def mp_I(x, d):
    mpmath.mp.dps = 25
    f = lambda t: 1 / (mpmath.log(t) * mpmath.log(t + d))
    pts = [2, 3, 10, 100] + [p for p in (1e3, 1e4, 1e5, 1e6) if p < x - d] + [x - d]
    pts = sorted(set(p for p in pts if p <= x - d))
    return float(mpmath.quad(f, pts))


@pytest.fixture(scope="module")
def hist_1e5(small_table):
    return count_differences(small_table, 10**5)


def test_riemann_oracle():
    assert hl.integral_I(10**4, 2) == pytest.approx(riemann_I(10**4, 2), rel=5e-3)


@pytest.mark.parametrize("x, d", [(10, 2), (1000, 2), (10**4, 210), (10**5, 2310), (10**6, 2)])
def test_mpmath_oracle(x, d):
    assert hl.integral_I(x, d, rel_tol=1e-12) == pytest.approx(mp_I(x, d), rel=1e-11)


def test_tolerance_nesting_grid():
    rng = np.random.default_rng(3)
    xs = rng.integers(100, 10**6, 100)
    worst = 0.0
    for x in xs:
        d = int(rng.integers(1, x - 3))
        a = hl.integral_I(int(x), d, rel_tol=1e-10)
        b = hl.integral_I(int(x), d, rel_tol=1e-12)
        worst = max(worst, abs(a - b) / abs(b))
    assert worst <= 1e-10


def test_shrinking_domain():
    x = 1000
    assert hl.integral_I(x, x - 3) < hl.integral_I(x, x - 4)
    assert 0 < hl.integral_I(x, x - 2.001) < 1e-2
    with pytest.raises(DomainError):
        hl.integral_I(x, x - 2)
    with pytest.raises(DomainError):
        hl.integral_I(x, 2, rel_tol=1e-3)


@pytest.mark.parametrize("x", [40, 300, 5003])
def test_bulk_matches_adaptive(x):
    bulk = hl.bulk_integral_I(x)
    assert np.all(np.isnan(bulk[x - 2 :]))
    ds = range(0, x - 2) if x < 500 else list(range(0, 60)) + list(range(x - 80, x - 2)) + [x // 2, x // 3]
    for d in ds:
        assert bulk[d] == pytest.approx(hl.integral_I(x, d, rel_tol=1e-13), rel=1e-12)


def test_g_model_basics(small_table, hist_1e5):
    assert hl.g_model(10**5, 7) == 0.0
    ratio = hl.g_model(10**5, 2) / hist_1e5[2]
    assert 0.8 <= ratio <= 1.2
    c2 = hl._c2_pair(None)[0]
    assert hl.g_model(10**4, 6) == pytest.approx(4 * c2 * hl.integral_I(10**4, 6))


def test_error_term_small_x(small_table):
    row = hl.error_term(1000, 2, small_table)
    assert row.g_exact == 35
    assert abs(row.error) <= 0.5 * row.g_model
    odd = hl.error_term(10**5, 25, small_table)  # 27 is composite
    assert odd.g_exact == 0 and odd.g_model == 0.0 and odd.error == 0.0


def test_profile_matches_single_rows(small_table, hist_1e5):
    rows = hl.model_profile(10**5, small_table, hist=hist_1e5)
    assert len(rows) == (10**5 - 3) // 2
    by_d = {r.d: r for r in rows}
    for d in (2, 30, 2310, 99996):
        single = hl.error_term(10**5, d, small_table)
        assert by_d[d].g_exact == single.g_exact
        assert by_d[d].g_model == pytest.approx(single.g_model, rel=1e-10)
        assert by_d[d].h_factor == pytest.approx(single.h_factor, rel=1e-10)


def test_error_small_relative_to_counts(small_table, hist_1e5):
    rows = hl.model_profile(10**5, small_table, hist=hist_1e5)
    rel = sum(abs(r.error) for r in rows) / sum(r.g_exact for r in rows)
    assert rel < 0.1


@pytest.mark.parametrize("x, champion", [(10**4, 210), (10**5, 2310)])
def test_model_argmax_tracks_champion(small_table, x, champion):
    hist = count_differences(small_table, x)
    assert hist.champions == (champion,)
    _, model = hl.model_counts(x)
    even = np.arange(2, x // 10 + 1, 2)
    assert int(even[np.argmax(model[even])]) == champion


def h_residual_constant(x):
    L = math.log(x)
    return abs(hl.h_factor(x, 2) - hl.h_expansion(x)) * L**3


def test_h_expansion_residual():
    cs = [h_residual_constant(10**k) for k in (4, 5, 6, 7)]
    assert all(24 < c <= 65 for c in cs)
    assert cs == sorted(cs, reverse=True)


def test_h_residual_scaling():
    for k in (3, 4, 5, 6):
        x, y = 10**k, 10 ** (k + 1)
        res_x = h_residual_constant(x) / math.log(x) ** 3
        res_y = h_residual_constant(y) / math.log(y) ** 3
        assert res_y <= res_x * (math.log(x) / math.log(y)) ** 3 / 0.5


def test_h_decreasing_and_above_one():
    assert hl.h_factor(10**6, 2) < hl.h_factor(10**4, 2)
    for x in (10**3, 10**4, 10**5):
        for d in (2, 6, x // 10, x // 4, x // 2):
            assert hl.h_factor(x, d) > 1


@pytest.mark.parametrize("x, lo, hi", [(9973, 0.08, 0.30), (99991, 0.10, 0.25)])
def test_nu_band(small_table, x, lo, hi):
    s = hl.nu_statistic(x, small_table)
    assert s.nu >= 0
    assert lo <= s.nu_normalized <= hi
    assert s.denominator == s.pi_x * (s.pi_x - 1) // 2


def test_mu_band_and_stability(small_table):
    for x in (9973, 29989, 99991):
        s = hl.mu_statistic(x, small_table)
        assert abs(s.mu) <= 5 / math.sqrt(s.pi_x)
    a = hl.mu_statistic(9973, small_table, rel_tol=1e-8)
    b = hl.mu_statistic(9973, small_table, rel_tol=1e-10)
    assert abs(a.mu - b.mu) < 1e-6 and math.copysign(1, a.mu) == math.copysign(1, b.mu)


def test_aggregate_needs_large_x(small_table):
    with pytest.raises(DomainError):
        hl.mu_statistic(997, small_table)
