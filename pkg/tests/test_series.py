import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from hgm1f1 import series
from hgm1f1.errors import PoleError, SingularPointError
from hgm1f1.partitions import partitions_of
from hgm1f1.series import HypParams, TruncationConfig

F = Fraction


def test_zonal_goldens_k2_k3():
    parts, rows = series.zonal_to_monomial_coeffs(2, 2)
    assert parts == [(2,), (1, 1)]
    assert rows == ((F(1), F(2, 3)), (F(0), F(4, 3)))
    parts, rows = series.zonal_to_monomial_coeffs(3, 3)
    assert parts == [(3,), (2, 1), (1, 1, 1)]
    assert rows == ((F(1), F(3, 5), F(2, 5)), (F(0), F(12, 5), F(18, 5)), (F(0), F(0), F(2)))


def test_zonal_float_matches_exact():
    for k in range(1, 9):
        parts, rows = series.zonal_to_monomial_coeffs(k, k)
        C = series.zonal_matrix(k, k)
        exact = np.array([[float(v) for v in r] for r in rows])
        assert np.allclose(C, exact, rtol=1e-14, atol=0)


def test_restricting_m_drops_long_partitions():
    parts, rows = series.zonal_to_monomial_coeffs(4, 2)
    full_parts, full_rows = series.zonal_to_monomial_coeffs(4, 4)
    for r, kap in enumerate(parts):
        R = full_parts.index(kap)
        for s, lam in enumerate(parts):
            assert rows[r][s] == full_rows[R][full_parts.index(lam)]


@pytest.mark.parametrize("k", range(1, 7))
def test_c_normalization(k):
    rng = np.random.default_rng(k)
    y = rng.uniform(0.1, 1.5, size=k)
    total = sum(series.zonal_eval(kap, y) for kap in partitions_of(k, k))
    assert total == pytest.approx(y.sum() ** k, rel=1e-12)


def test_zonal_one_variable():
    assert series.zonal_eval((4,), [1.7]) == pytest.approx(1.7 ** 4, rel=1e-15)
    assert series.zonal_eval((2, 1), [1.7]) == 0.0


def test_monomial_symmetric():
    y = (2.0, 3.0, 5.0)
    assert series.monomial_symmetric((1,), y) == 10
    assert series.monomial_symmetric((1, 1), y) == 6 + 10 + 15
    assert series.monomial_symmetric((2, 1), y) == 4 * 3 + 4 * 5 + 9 * 2 + 9 * 5 + 25 * 2 + 25 * 3
    assert series.monomial_symmetric((1, 1, 1, 1), y) == 0


def test_q_second_order_expansion():
    # coefficients of M_(2) and M_(1,1) from the two zonal polynomials of degree 2
    a, c = F(5, 3), F(17, 4)
    p = HypParams(a, c)
    poch = lambda x, kap: series.gen_pochhammer(x, kap)
    assert series.q_coefficient((2,), p) == poch(a, (2,)) / (2 * poch(c, (2,)))
    assert series.q_coefficient((1, 1), p) == (poch(a, (2,)) / (3 * poch(c, (2,)))
                                               + 2 * poch(a, (1, 1)) / (3 * poch(c, (1, 1))))


@pytest.mark.parametrize("k", range(1, 7))
def test_closed_forms(k):
    p = HypParams(F(7, 2), F(23, 3))
    assert series.q_ones_closed_form(k, p) == series.q_coefficient((1,) * k, p)
    if k >= 2:
        assert series.q_two_ones_closed_form(k, p) == series.q_coefficient((2,) + (1,) * (k - 2), p)


def test_q_table_float_matches_exact():
    pf = HypParams(F(3, 2), F(4))
    blocks = series.q_table(HypParams(1.5, 4.0), 6, 3)
    for k in range(7):
        for q, lam in zip(blocks[k], partitions_of(k, 3)):
            assert q == pytest.approx(float(series.q_coefficient(lam, pf)), rel=1e-13)


@pytest.mark.parametrize("y", [0.3, 1.0, 2.5, -1.2])
def test_one_variable_matches_scipy(y):
    p = HypParams(1.3, 2.9)
    got = series.hyp1f1_series(p, [y], TruncationConfig(60, 1))
    assert got == pytest.approx(special.hyp1f1(1.3, 2.9, y), rel=1e-13)


def test_a_equals_c_is_exponential_of_trace():
    p = HypParams(2.5, 2.5)
    y = [0.4, 0.9, 0.2]
    got = series.hyp1f1_series(p, y, TruncationConfig(40, 3))
    assert got == pytest.approx(math.exp(sum(y)), rel=1e-13)


@settings(deadline=None, max_examples=20)
@given(st.floats(0.05, 0.6), st.floats(0.05, 0.6), st.floats(1.1, 4.0), st.floats(0.2, 3.0))
def test_kummer_relation(y1, y2, a, dc):
    p = HypParams(a, a + dc)
    q = HypParams(dc, a + dc)
    cfg = TruncationConfig(30, 2)
    lhs = math.exp(-(y1 + y2)) * series.hyp1f1_series(p, [y1, y2], cfg)
    rhs = series.hyp1f1_series(q, [-y1, -y2], cfg)
    assert abs(lhs - rhs) < 1e-10


def test_derivative_dp_matches_finite_differences():
    p = HypParams(1.5, 3.0)
    y = np.array([0.2, 0.5, 0.9])
    cfg = TruncationConfig(40, 3)
    D = series.squarefree_derivatives_at(p, y, cfg)
    f = lambda z: series.hyp1f1_series(p, z, cfg)
    assert D[0] == pytest.approx(f(y), rel=1e-14)
    h = 1e-5
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        assert D[1 << i] == pytest.approx((f(y + e) - f(y - e)) / (2 * h), rel=1e-8)
    e1, e2 = np.array([h, 0, 0]), np.array([0, h, 0])
    mixed = (f(y + e1 + e2) - f(y + e1 - e2) - f(y - e1 + e2) + f(y - e1 - e2)) / (4 * h * h)
    assert D[0b011] == pytest.approx(mixed, rel=1e-5)


def test_derivative_dp_matches_splitting_lemma():
    p = HypParams(2.0, 4.5)
    y = [0.3, 0.7, 1.1]
    cfg = TruncationConfig(25, 3)
    D = series.squarefree_derivatives_at(p, y, cfg)
    assert D[0b001] == pytest.approx(series.rect_derivative_series((1,), p, y, cfg), rel=1e-12)
    assert D[0b011] == pytest.approx(series.rect_derivative_series((1, 1), p, y, cfg), rel=1e-12)
    assert D[0b111] == pytest.approx(series.rect_derivative_series((1, 1, 1), p, y, cfg), rel=1e-12)


def test_series_satisfies_the_differential_equation():
    # y_i F_ii + (c - y_i) F_i + 1/2 sum_j y_j (F_i - F_j) / (y_i - y_j) - a F = 0
    p = HypParams(1.5, 3.5)
    y = np.array([0.25, 0.6, 1.0])
    cfg = TruncationConfig(45, 3)
    D = series.squarefree_derivatives_at(p, y, cfg)
    h = 1e-5
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        Fii = (series.squarefree_derivatives_at(p, y + e, cfg)[1 << i]
               - series.squarefree_derivatives_at(p, y - e, cfg)[1 << i]) / (2 * h)
        res = y[i] * Fii + (p.c - y[i]) * D[1 << i] - p.a * D[0]
        for j in range(3):
            if j != i:
                res += 0.5 * y[j] * (D[1 << i] - D[1 << j]) / (y[i] - y[j])
        assert abs(res) < 1e-7


def test_linear_initial_values_close_to_series():
    p = HypParams(1.5, 3.0)
    y = np.array([1e-4, 2e-4, 3.5e-4])
    lin = series.squarefree_derivatives_at(p, y, None, mode="linear")
    full = series.squarefree_derivatives_at(p, y, TruncationConfig(10, 3))
    assert np.allclose(lin, full, rtol=1e-6)


def test_choose_degree_reaches_tolerance():
    p = HypParams(1.5, 3.0)
    y = [0.5, 1.0]
    K = series.choose_degree(p, y)
    ref = series.hyp1f1_series(p, y, TruncationConfig(120, 2))
    assert series.hyp1f1_series(p, y, TruncationConfig(K, 2)) == pytest.approx(ref, rel=1e-12)


def test_poles_and_ties_raise():
    with pytest.raises(PoleError):
        series.hyp1f1_series(HypParams(1.0, -2.0), [0.1], TruncationConfig(5, 1))
    with pytest.raises(PoleError):
        # (c)_kappa hits zero in row 2 for c = 1/2
        series.hyp1f1_series(HypParams(1.0, 0.5), [0.1, 0.2], TruncationConfig(4, 2))
    with pytest.raises(SingularPointError):
        series.squarefree_derivatives_at(HypParams(1.0, 2.0), [0.1, 0.1], TruncationConfig(5, 2))
    with pytest.raises(ValueError):
        TruncationConfig(0, 2)


def test_dump_tables_format():
    text = series.dump_tables(2, 2, HypParams(1.5, 3))
    lines = text.strip().split("\n")
    assert lines[0].startswith("#")
    assert "c\t2\t2\t1.1\t2/3" in lines
    assert "c\t2\t1.1\t1.1\t4/3" in lines
    assert "q\t0\t-\t0\t1/1" in lines
    assert "q\t1\t-\t1\t1/2" in lines
