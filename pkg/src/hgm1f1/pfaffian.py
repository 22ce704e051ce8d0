"""Pfaffian system of 1F1 on the non-diagonal region.

Entries of a derivative vector are indexed by bitmask: bit ``i-1`` set means
``d_i`` is applied, so for m=2 the order is (F, d1F, d2F, d1d2F).

The only non-trivial entries of ``P_i F`` are ``d_i^2 d_J F`` with ``i`` not
in ``J``.  They come from the memo table

    y_i d_i^2 d_J F = r(i, J; y) F + 1/2 sum_{k in J} (y_k d_k^2 d_{J-k} F) / (y_i - y_k),

filled in increasing ``J``, so each entry costs O(m) once the smaller ones
are known.
"""
import numpy as np

from . import kernels
from .errors import SingularPointError
from .series import HypParams, check_distinct

#: relative separation below which two coordinates count as tied
TIE_EPS = 1e-8


def _point(y, eps_rel=TIE_EPS):
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return check_distinct(y, eps_rel)


def _vec(F, m):
    F = np.asarray(F, dtype=float)
    if F.shape != (2 ** m,):
        raise ValueError(f"derivative vector must have length 2**{m}, got {F.shape}")
    return F


def r_apply(i, J, y, F, params):
    """Square-free part r(i, J; y) of ``d_J g_i`` applied to F (0-based ``i``)."""
    y = _point(y)
    m = len(y)
    F = _vec(F, m)
    bi = 1 << i
    if J & bi:
        raise ValueError(f"index {i} must not be in J={J:#b}")
    a, c = params.a, params.c
    I = J | bi
    acc = (c - y[i]) * F[I] - a * F[J]
    for k in range(m):
        if k == i:
            continue
        bk = 1 << k
        d = y[i] - y[k]
        if J & bk:
            acc += 0.5 * y[k] / d * F[I] + 0.5 * y[i] / d ** 2 * (F[I ^ bk] - F[J])
        else:
            acc += 0.5 * y[k] / d * (F[I] - F[J | bk])
    return -acc


def second_derivs_table(y, F, params, use_numba=None):
    """Array ``T[i, J] = y_i d_i^2 d_J F`` for ``i`` not in ``J``; NaN elsewhere."""
    y = _point(y)
    m = len(y)
    F = _vec(F, m)
    T = kernels.second_derivs(y, F, params.a, params.c, use_numba=use_numba)
    J = np.arange(2 ** m)
    for i in range(m):
        T[i, (J >> i) & 1 == 1] = np.nan
    return T


def apply_pfaffian(i, y, F, params, use_numba=None):
    """``P_i(y) F``: the derivative of the vector F along coordinate ``i`` (0-based)."""
    y = _point(y)
    m = len(y)
    F = _vec(F, m)
    T = kernels.second_derivs(y, F, params.a, params.c, use_numba=use_numba)
    bi = 1 << i
    J = np.arange(2 ** m)
    has = (J & bi) != 0
    return np.where(has, T[i, J & ~bi] / y[i], F[J | bi])


def pfaffian_matrix(i, y, params):
    """Dense 2^m x 2^m matrix of P_i(y), assembled column by column."""
    y = _point(y)
    N = 2 ** len(y)
    eye = np.eye(N)
    return np.column_stack([apply_pfaffian(i, y, eye[:, j], params) for j in range(N)])


def wishart_params(m, n):
    return HypParams((m + 1) / 2, (n + m + 1) / 2)


def g_rhs(x, G, beta, n, m=None, params=None, use_numba=None):
    """Right-hand side of the radial system for G(x) = exp(-x sum b) x^(mn/2) F(b x)."""
    beta = np.ascontiguousarray(beta, dtype=float)
    m = len(beta) if m is None else m
    if len(beta) != m:
        raise ValueError("beta must have m entries")
    if x <= 0:
        raise SingularPointError(f"radial variable must be positive, got x={x}")
    _point(beta)
    params = wishart_params(m, n) if params is None else params
    G = _vec(G, m)
    shift = -beta.sum() + m * n / (2 * x)
    return kernels.g_rhs(x, G, beta, params.a, params.c, shift, use_numba=use_numba)


def radial_rhs(beta, params, n=0.0, scale=True, use_numba=None):
    """Closure ``(x, G) -> dG/dx`` for the integrator, with validation done once.

    With ``scale=False`` the vector is F(b x) itself; otherwise the
    exp(-x sum b) x^(mn/2) factor is folded in as in :func:`g_rhs`.
    """
    beta = np.ascontiguousarray(beta, dtype=float)
    _point(beta)
    m = len(beta)
    total = beta.sum() if scale else 0.0
    half_mn = m * n / 2 if scale else 0.0
    a, c = float(params.a), float(params.c)
    fn = kernels._g_rhs_nb if kernels._pick(use_numba) else kernels._g_rhs_np

    def rhs(x, G):
        return fn(x, G, beta, a, c, half_mn / x - total)

    return rhs


def a0_matrix(beta):
    """Leading term of the radial coefficient matrix as x -> infinity."""
    beta = np.asarray(beta, dtype=float)
    m = len(beta)
    N = 2 ** m
    A = np.zeros((N, N))
    for I in range(N):
        A[I, I] = -sum(beta[i] for i in range(m) if not I >> i & 1)
        for i in range(m):
            if not I >> i & 1:
                A[I, I | 1 << i] = beta[i]
    return A


def a0_spectrum(beta):
    """Eigenvalues -sum_{i not in I} beta_i of the limiting matrix, in bitmask order."""
    return list(np.diag(a0_matrix(beta)))


def transport(F, path, params, step, use_numba=None):
    """Carry F along a polyline in y-space with RK4, using every P_i.

    ``path`` is a sequence of points; on each straight piece
    dF/ds = sum_i (b - a)_i P_i(a + s (b - a)) F for s in [0, 1].
    """
    from .ode import IntegrationPlan, integrate

    F = np.asarray(F, dtype=float)
    a_par, c_par = float(params.a), float(params.c)
    fn = kernels._g_rhs_nb if kernels._pick(use_numba) else kernels._g_rhs_np
    pts = [np.asarray(p, dtype=float) for p in path]
    for start, end in zip(pts[:-1], pts[1:]):
        d = end - start
        length = float(np.max(np.abs(d)))
        if length == 0:
            continue
        moving = np.nonzero(d)[0]

        def rhs(s, v, start=start, d=d, moving=moving):
            y = start + s * d
            _point(y)
            return _directional(y, v, d, moving, a_par, c_par, use_numba)

        n_steps = max(1, int(np.ceil(length / step)))
        F = integrate(rhs, F, IntegrationPlan(0.0, 1.0, 1.0 / n_steps, "rk4"))
    return F


def _directional(y, v, d, moving, a, c, use_numba):
    T = kernels.second_derivs(y, v, a, c, use_numba=use_numba)
    J = np.arange(len(v))
    out = np.zeros_like(v)
    for i in moving:
        bi = 1 << int(i)
        has = (J & bi) != 0
        out += d[i] * np.where(has, T[i, J & ~bi] / y[i], v[J | bi])
    return out


def dump_matrix(i, y, params, stream=None):
    """TSV dump of P_i(y): one row per output entry, header row with subset masks."""
    P = pfaffian_matrix(i, y, params)
    N = P.shape[0]
    lines = ["#row\\col\t" + "\t".join(str(j) for j in range(N))]
    for r in range(N):
        lines.append(str(r) + "\t" + "\t".join(repr(float(v)) for v in P[r]))
    text = "\n".join(lines) + "\n"
    if stream is not None:
        stream.write(text)
    return text
