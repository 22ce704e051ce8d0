"""1F1(a; c; y I_m) on the diagonal line, through the restricted ODEs.

For m=2 the function f(y) = F(y, y) satisfies a third-order ODE and for m=3
a fourth-order one.  Both have a regular singular point at y = 0, so the
integration starts at a small y0 with values taken from the series.  The
state is carried as exp(-m y) (f, f', ...) so that it stays O(1).

For m >= 4 no diagonal ODE is available; evaluation falls back to the
Pfaffian system at slightly separated coordinates.
"""
import math
import warnings

import numpy as np

from . import series
from .errors import SingularPointError
from .ode import IntegrationPlan, integrate

Y0 = 1e-2
SERIES_DEGREE = 40


def _check_y(y):
    if not y > 0:
        raise SingularPointError(f"diagonal ODE is singular at y={y!r} <= 0")


def diag_coeffs_m2(y, a, c):
    """(h0, h1, h2) with f''' = h2 f'' + h1 f' + h0 f."""
    h2 = -3 * (c - 1 - y) / y - 2 / y
    h1 = 4 * a / y - 2 * (c - y) * (c - 1 - y) / y ** 2
    h0 = 4 * a * (c - 1 - y) / y ** 2
    return h0, h1, h2


def diag_rhs_m2(y, s, params):
    """Derivative of the companion state (f, f', f'') for m = 2."""
    _check_y(y)
    h0, h1, h2 = diag_coeffs_m2(y, params.a, params.c)
    return np.array([s[1], s[2], h2 * s[2] + h1 * s[1] + h0 * s[0]])


def diag_poly_m3(y, a, c):
    """Polynomial coefficients (of f, f', f'', f''', f'''') of the m = 3 ODE."""
    p4 = y ** 3
    p3 = -6 * y ** 3 + (6 * c - 4) * y ** 2
    p2 = 11 * y ** 3 + (-10 * a - 22 * c + 18) * y ** 2 + (11 * c ** 2 - 17 * c + 4) * y
    p1 = (-6 * y ** 3 + (30 * a + 18 * c - 18) * y ** 2
          + ((-30 * c + 34) * a - 18 * c ** 2 + 34 * c - 12) * y
          + 6 * c ** 3 - 16 * c ** 2 + 10 * c)
    p0 = -18 * a * y ** 2 + (9 * a ** 2 + (36 * c - 51) * a) * y + (-18 * c ** 2 + 48 * c - 30) * a
    return p0, p1, p2, p3, p4


def diag_rhs_m3(y, s, params):
    """Derivative of the companion state (f, f', f'', f''') for m = 3."""
    _check_y(y)
    p0, p1, p2, p3, p4 = diag_poly_m3(y, params.a, params.c)
    f4 = -(p3 * s[3] + p2 * s[2] + p1 * s[1] + p0 * s[0]) / p4
    return np.array([s[1], s[2], s[3], f4])


_RHS = {2: diag_rhs_m2, 3: diag_rhs_m3}


def diagonal_series_coeffs(params, m, degree=SERIES_DEGREE):
    """Taylor coefficients d_k of f(y) = 1F1(a; c; y I_m) = sum_k d_k y^k."""
    params.check(degree, m)
    blocks = series.q_table(params, degree, m)
    out = np.zeros(degree + 1)
    for k in range(degree + 1):
        for q, lam in zip(blocks[k], series.partitions_of(k, m)):
            mult = 1
            for cnt in series_multiplicities(lam):
                mult *= math.factorial(cnt)
            out[k] += q * math.factorial(m) / (math.factorial(m - len(lam)) * mult)
    return out


def series_multiplicities(lam):
    counts = {}
    for p in lam:
        counts[p] = counts.get(p, 0) + 1
    return counts.values()


def diagonal_state(params, y, m, order, degree=SERIES_DEGREE):
    """(f, f', ..., f^(order-1)) at y from the truncated Taylor series."""
    d = diagonal_series_coeffs(params, m, degree)
    k = np.arange(degree + 1)
    out = np.zeros(order)
    for r in range(order):
        fall = np.ones_like(d)
        for j in range(r):
            fall = fall * (k - j)
        with np.errstate(divide="ignore", invalid="ignore"):
            powers = np.where(k >= r, float(y) ** np.clip(k - r, 0, None), 0.0)
        out[r] = float(np.sum(d * fall * powers))
    return out


def log_hyp1f1_diagonal(params, y, m, plan=None, y0=Y0):
    """log 1F1(a; c; y I_m) for m in {2, 3} via the diagonal ODE."""
    if m not in _RHS:
        raise ValueError(f"no diagonal ODE for m={m}; only m=2 and m=3 are supported")
    _check_y(y)
    rhs_f = _RHS[m]
    order = m + 1
    if y <= y0:
        return math.log(diagonal_state(params, y, m, 1)[0])
    u0 = diagonal_state(params, y0, m, order) * math.exp(-m * y0)

    def rhs(t, u):
        return rhs_f(t, u, params) - m * u

    if plan is None:
        plan = IntegrationPlan(y0, float(y), 1e-3, "rk4")
    else:
        plan = IntegrationPlan(y0, float(y), plan.step, plan.method, plan.rel_tol)
    u = integrate(rhs, u0, plan)
    return m * y + math.log(u[0])


def hyp1f1_diagonal(params, y, m, plan=None, y0=Y0, delta=1e-5):
    """f(y) = 1F1(a; c; y I_m).

    m = 2, 3 use the restricted ODE.  Larger m evaluates the Pfaffian route
    at y (1, 1 + delta, 1 + 2 delta, ...) and warns that the result carries
    an O(delta) bias.
    """
    if m == 1:
        from .series import TruncationConfig, hyp1f1_series, choose_degree
        return hyp1f1_series(params, [y], TruncationConfig(choose_degree(params, [y]), 1))
    if m in _RHS:
        return math.exp(log_hyp1f1_diagonal(params, y, m, plan, y0))
    warnings.warn(f"no diagonal ODE for m={m}; using the Pfaffian route with relative "
                  f"coordinate spread {delta}", RuntimeWarning, stacklevel=2)
    b = 1.0 + delta * np.arange(m)
    return math.exp(log_hyp1f1_radial(params, b, y))


def log_hyp1f1_radial(params, direction, t, t0=None, step=1e-3, degree=None):
    """log 1F1(a; c; t * direction) by integrating the Pfaffian system along the ray."""
    from .pfaffian import radial_rhs

    b = np.asarray(direction, dtype=float)
    m = len(b)
    if t0 is None:
        t0 = min(Y0 / float(np.max(np.abs(b))), t / 2)
    y0 = b * t0
    K = degree or series.choose_degree(params, y0)
    F0 = series.squarefree_derivatives_at(params, y0, series.TruncationConfig(K, m), eps_rel=1e-14)
    G0 = F0 * math.exp(-t0 * b.sum())
    rhs = radial_rhs(b, params, scale=True)
    G = integrate(rhs, G0, IntegrationPlan(t0, float(t), step, "rk4"))
    return t * b.sum() + math.log(G[0])


def hyp1f1_near_diagonal(params, y, m, delta=1e-4, step=1e-3):
    """Pfaffian value at y (1, 1 + delta, ...), Richardson-extrapolated to delta -> 0.

    The spread is linear in delta, so the bias is first order and one
    extrapolation step (2 F(delta) - F(2 delta)) removes it.
    """
    f1 = math.exp(log_hyp1f1_radial(params, 1.0 + delta * np.arange(m), y, step=step))
    f2 = math.exp(log_hyp1f1_radial(params, 1.0 + 2 * delta * np.arange(m), y, step=step))
    return 2 * f1 - f2
