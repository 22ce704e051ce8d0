import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats

from hgm1f1 import wishart
from hgm1f1.errors import PoleError
from hgm1f1.series import HypParams
from hgm1f1.wishart import HgmConfig, WishartProblem


def test_multivariate_gamma():
    assert wishart.multivariate_gamma(1, 3.7) == pytest.approx(special.gammaln(3.7))
    assert wishart.multivariate_gamma(2, 2.0) == pytest.approx(math.log(math.pi / 2))
    rng = np.random.default_rng(1)
    for _ in range(10):
        m, a = int(rng.integers(2, 6)), rng.uniform(3, 9)
        lhs = wishart.multivariate_gamma(m, a)
        rhs = (m - 1) / 2 * math.log(math.pi) + special.gammaln(a) + wishart.multivariate_gamma(m - 1, a - 0.5)
        assert lhs == pytest.approx(rhs, rel=1e-13)
    with pytest.raises(PoleError):
        wishart.multivariate_gamma(3, 1.0)


def test_chi2_cdf():
    assert wishart.chi2_cdf(0.0, 5) == 0.0
    for x in (0.1, 1.0, 7.5, 30.0):
        assert wishart.chi2_cdf(x, 2) == pytest.approx(1 - math.exp(-x / 2), abs=1e-14)
    assert round(wishart.chi2_cdf(40, 7), 7) == 0.9999987
    with pytest.raises(ValueError):
        wishart.chi2_cdf(1.0, 0)


def test_kummer_check():
    p = HypParams(1.5, 3.0)
    assert wishart.kummer_check(p, [0.0, 0.0]) == 0.0
    assert wishart.kummer_check(p, [0.1, 0.3, 0.2]) < 1e-10
    assert wishart.kummer_check(HypParams(2.0, 2.0), [0.7]) < 1e-14


@pytest.mark.parametrize("n,beta", [(3, 1.0), (7, 0.4), (12.5, 2.0)])
def test_one_dimension_is_scaled_chi_square(n, beta):
    prob = WishartProblem(1, n, (beta,))
    for x in (0.3, 2.0, 9.0):
        got = wishart.cdf_largest_root(x, prob)
        assert got == pytest.approx(stats.chi2.cdf(2 * beta * x, n), abs=1e-8)


def test_m2_against_monte_carlo():
    # l1 of W_2(n, diag(1/2, 1/4)), fixed seed
    n = 3
    rng = np.random.default_rng(12345)
    Z = rng.normal(size=(200_000, n, 2)) * np.sqrt([0.5, 0.25])
    W = np.einsum("kni,knj->kij", Z, Z)
    l1 = np.linalg.eigvalsh(W)[:, -1]
    prob = WishartProblem(2, n, (1.0, 2.0))
    for x in (1.0, 3.0, 5.0):
        emp = float(np.mean(l1 < x))
        assert wishart.cdf_largest_root(x, prob) == pytest.approx(emp, abs=4e-3)


def test_problem_validation():
    with pytest.raises(ValueError):
        WishartProblem(2, 3, (1.0,))
    with pytest.raises(ValueError):
        WishartProblem(2, 3, (1.0, -2.0))
    with pytest.raises(ValueError):
        WishartProblem(3, 1.5, (1.0, 2.0, 3.0))
    with pytest.raises(ValueError):
        WishartProblem(0, 3, ())
    p = WishartProblem(3, 5, (3.0, 1.0, 2.0))
    assert p.beta == (1.0, 2.0, 3.0)
    assert WishartProblem.from_sigma([0.5, 0.25], 3).beta == (1.0, 2.0)
    assert p.params == HypParams(2.0, 4.5)


def test_config_validation():
    with pytest.raises(ValueError):
        HgmConfig(step=-1)
    with pytest.raises(ValueError):
        HgmConfig(tie_policy="ignore")
    with pytest.raises(ValueError):
        HgmConfig(method="leapfrog")
    with pytest.raises(ValueError):
        HgmConfig(output_format="xml")
    assert HgmConfig().start(2) == 0.01
    assert HgmConfig().start(10) == pytest.approx(0.2)
    assert HgmConfig().start(10, 10.0) == pytest.approx(0.1)
    assert HgmConfig().start(2, 2.0) == 0.01
    assert HgmConfig(x0=0.3).start(10, 10.0) == 0.3


def test_monotone_and_tends_to_one():
    prob = WishartProblem(3, 6, (0.8, 1.5, 2.5))
    xs = np.linspace(0.2, 25, 40)
    ps = wishart.cdf_curve(xs, prob)
    assert all(b >= a for a, b in zip(ps[:-1], ps[1:]))
    assert 1 - 1e-3 <= ps[-1] <= 1 + 1e-4


def test_curve_matches_pointwise():
    prob = WishartProblem(2, 3, (1.0, 2.0))
    xs = [0.005, 0.5, 2.0, 4.0]
    cfg = HgmConfig(step=1e-3)
    curve = wishart.cdf_curve(xs, prob, cfg)
    for x, p in zip(xs, curve):
        assert p == pytest.approx(wishart.cdf_largest_root(x, prob, cfg), abs=1e-12)


def test_scale_equivariance():
    prob = WishartProblem(3, 5, (1.0, 1.7, 2.9))
    t = 2.5
    scaled = WishartProblem(3, 5, tuple(b / t for b in prob.beta))
    assert wishart.cdf_largest_root(3.0 * t, scaled) == pytest.approx(
        wishart.cdf_largest_root(3.0, prob), abs=1e-8)


@settings(deadline=None, max_examples=8)
@given(st.lists(st.floats(0.3, 4.0), min_size=2, max_size=3, unique=True), st.floats(0.5, 15.0))
def test_bounds_sandwich(beta, x):
    b = sorted(beta)
    if min(b2 - b1 for b1, b2 in zip(b[:-1], b[1:])) < 0.05:
        return
    prob = WishartProblem(len(b), len(b) + 2, tuple(b))
    p = wishart.cdf_largest_root(x, prob)
    lo, hi = wishart.bounds(x, prob)
    assert lo - 1e-8 <= p <= hi + 1e-8


def test_equal_beta_routes_to_diagonal():
    prob = WishartProblem(2, 3, (1.5, 1.5))
    d = wishart.cdf_largest_root(2.0, prob)
    # the centered-spread extrapolation is an independent route to the same number
    iso = wishart._near_isotropic(2.0, prob, HgmConfig(x0=0.5))
    assert d == pytest.approx(iso, abs=1e-8)
    with pytest.raises(ValueError):
        wishart.cdf_largest_root(2.0, prob, HgmConfig(tie_policy="error"))


def test_partial_ties_are_perturbed_with_warning():
    prob = WishartProblem(3, 5, (1.0, 2.0, 2.0))
    with pytest.warns(RuntimeWarning):
        p = wishart.cdf_largest_root(3.0, prob)
    near = WishartProblem(3, 5, (1.0, 2.0, 2.0 * (1 + 1e-3)))
    assert p == pytest.approx(wishart.cdf_largest_root(3.0, near), abs=1e-3)
    with pytest.raises(ValueError):
        wishart.cdf_largest_root(3.0, prob, HgmConfig(tie_policy="diagonal"))


def test_quantile_round_trip():
    prob = WishartProblem(3, 6, (0.8, 1.5, 2.5))
    for p in (0.1, 0.5, 0.97):
        x = wishart.quantile(p, prob)
        assert wishart.cdf_largest_root(x, prob) == pytest.approx(p, abs=1e-7)
        # the chi-square bound puts the quantile no lower than its own quantile
        assert x >= stats.chi2.ppf(p, prob.n) / (2 * min(prob.beta)) - 1e-9
    with pytest.raises(ValueError):
        wishart.quantile(1.0, prob)


def test_bad_x():
    prob = WishartProblem(2, 3, (1.0, 2.0))
    with pytest.raises(ValueError):
        wishart.cdf_largest_root(-1.0, prob)
    with pytest.raises(ValueError):
        wishart.cdf_curve([2.0, 1.0], prob)
    assert wishart.cdf_curve([], prob) == []


def test_overshoot_warns_and_clamps():
    with pytest.warns(RuntimeWarning):
        assert wishart._finish(1.01, 3.0, True) == 1.0
    with pytest.warns(RuntimeWarning):
        assert wishart._finish(1.01, 3.0, False) == 1.01
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert wishart._finish(1 + 1e-6, 3.0, True) == 1.0


@pytest.mark.parametrize("m,n", [(2, 3), (3, 5), (3, 4.5), (2, 6.3)])
def test_isotropic_formula_matches_diagonal_ode(m, n):
    prob = WishartProblem(m, n, (1.3,) * m)
    xs = [0.5, 2.0, 6.0]
    got = wishart.isotropic_cdf(xs, m, n, 1.3)
    for x, p in zip(xs, got):
        assert p == pytest.approx(wishart.cdf_largest_root(x, prob), abs=1e-10)


def test_isotropic_formula_one_dimension():
    assert wishart.isotropic_cdf([2.0], 1, 3, 0.7)[0] == pytest.approx(stats.chi2.cdf(2.8, 3), abs=1e-14)


def test_isotropic_formula_matches_spread_extrapolation_m5():
    iso = WishartProblem(5, 7, (1.0,) * 5)
    ext = wishart._near_isotropic(20.0, iso, HgmConfig(x0=0.5), spreads=(0.1, 0.05, 0.025, 0.0125))
    assert wishart.cdf_largest_root(20.0, iso) == pytest.approx(ext, abs=1e-8)


def test_equal_beta_large_m_uses_isotropic_formula():
    prob = WishartProblem(4, 6, (2.0,) * 4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        p = wishart.cdf_largest_root(1.5, prob)
    assert p == pytest.approx(wishart.isotropic_cdf([1.5], 4, 6, 2.0)[0], abs=0)
    assert wishart.lower_bound(1.5, WishartProblem(4, 6, (2.0, 3.0, 4.0, 5.0))) == p
