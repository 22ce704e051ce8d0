"""Inner loops of the library, each in a numba flavour and a numpy flavour.

The public names at the bottom dispatch on ``_accel.USE_NUMBA``.  Both
flavours take and return plain float64 arrays and are tested against each
other, so either can serve as the reference for the other.

Three kernels live here:

* ``zonal_block``   James' recurrence for the zonal-to-monomial matrix of
                    one weight ``k``;
* ``deriv_dp``      sum over exponent assignments giving ``d_J M_mu(z)``
                    for every partition state ``mu`` and subset ``J``;
* ``second_derivs`` / ``g_rhs``  the memo table ``y_i d_i^2 d_J F`` and the
                    radial right-hand side built from it.
"""
import numpy as np

from . import _accel
from ._accel import njit


# ---------------------------------------------------------------------------
# zonal coefficients

@njit(cache=True)
def _zonal_block_nb(trans_ptr, trans_idx, trans_w, rho, dom, diag):
    n = rho.shape[0]
    C = np.zeros((n, n))
    for r in range(n):
        C[r, r] = diag[r]
        for col in range(r + 1, n):
            if not dom[r, col]:
                continue
            s = 0.0
            for t in range(trans_ptr[col], trans_ptr[col + 1]):
                s += trans_w[t] * C[r, trans_idx[t]]
            C[r, col] = s / (rho[r] - rho[col])
    return C


def _zonal_block_np(trans_ptr, trans_idx, trans_w, rho, dom, diag):
    n = rho.shape[0]
    C = np.diag(np.asarray(diag, dtype=float))
    rows = np.arange(n)
    for col in range(n):
        lo, hi = trans_ptr[col], trans_ptr[col + 1]
        if lo == hi:
            continue
        s = C[:, trans_idx[lo:hi]] @ trans_w[lo:hi]
        gap = rho - rho[col]
        ok = dom[:, col] & (rows < col)
        C[ok, col] = s[ok] / gap[ok]
    return C


# ---------------------------------------------------------------------------
# monomial derivatives over partition states

@njit(cache=True)
def _deriv_dp_nb(pw, dpw, masks, trans_ptr, trans_d, trans_parent, root):
    m = pw.shape[0]
    n_states = trans_ptr.shape[0] - 1
    nJ = masks.shape[0]
    S = np.zeros((n_states, nJ))
    for jj in range(nJ):
        S[root, jj] = 1.0
    for p in range(m):
        for s in range(n_states):
            lo = trans_ptr[s]
            hi = trans_ptr[s + 1]
            for jj in range(nJ):
                inj = (masks[jj] >> p) & 1
                acc = 0.0 if inj else S[s, jj]
                for t in range(lo, hi):
                    d = trans_d[t]
                    w = dpw[p, d] if inj else pw[p, d]
                    acc += w * S[trans_parent[t], jj]
                S[s, jj] = acc
    return S


def _deriv_dp_np(pw, dpw, masks, trans_ptr, trans_d, trans_parent, root, groups):
    m = pw.shape[0]
    n_states = trans_ptr.shape[0] - 1
    S = np.zeros((n_states, masks.shape[0]))
    S[root] = 1.0
    for p in range(m):
        inj = ((masks >> p) & 1).astype(bool)
        for states, t_local, t_d, t_par in groups:
            w = np.where(inj[None, :], dpw[p, t_d][:, None], pw[p, t_d][:, None])
            contrib = w * S[t_par]
            new = np.where(inj[None, :], 0.0, S[states])
            np.add.at(new, t_local, contrib)
            S[states] = new
    return S


# ---------------------------------------------------------------------------
# Pfaffian memo table

@njit(cache=True)
def _second_derivs_nb(y, F, a, c):
    m = y.shape[0]
    N = 1 << m
    inv = np.zeros((m, m))
    for i in range(m):
        for k in range(m):
            if i != k:
                inv[i, k] = 1.0 / (y[i] - y[k])
    T = np.zeros((m, N))
    for J in range(N):
        fJ = F[J]
        for i in range(m):
            bi = 1 << i
            if J & bi:
                continue
            I = J | bi
            yi = y[i]
            fI = F[I]
            acc = (c - yi) * fI - a * fJ
            rec = 0.0
            for k in range(m):
                if k == i:
                    continue
                bk = 1 << k
                w = inv[i, k]
                if J & bk:
                    acc += 0.5 * y[k] * w * fI + 0.5 * yi * w * w * (F[I ^ bk] - fJ)
                    rec += w * T[k, J ^ bk]
                else:
                    acc += 0.5 * y[k] * w * (fI - F[J | bk])
            T[i, J] = -acc + 0.5 * rec
    return T


def _second_derivs_np(y, F, a, c):
    m = y.shape[0]
    N = 1 << m
    J = np.arange(N)
    diff = y[:, None] - y[None, :]
    np.fill_diagonal(diff, 1.0)
    inv = 1.0 / diff
    np.fill_diagonal(inv, 0.0)
    R = np.empty((m, N))
    for i in range(m):
        I = J | (1 << i)
        fI = F[I]
        acc = (c - y[i]) * fI - a * F
        for k in range(m):
            if k == i:
                continue
            bk = 1 << k
            w = inv[i, k]
            ink = (J & bk) != 0
            acc = acc + np.where(
                ink,
                0.5 * y[k] * w * fI + 0.5 * y[i] * w * w * (F[I ^ bk] - F),
                0.5 * y[k] * w * (fI - F[J | bk]),
            )
        R[i] = -acc
    T = np.zeros((m, N))
    pop = np.array([bin(j).count("1") for j in range(N)])
    for p in range(m + 1):
        L = J[pop == p]
        acc = R[:, L].copy()
        for k in range(m):
            bk = 1 << k
            ink = (L & bk) != 0
            if not ink.any():
                continue
            src = np.where(ink, T[k, L ^ bk], 0.0)
            acc += 0.5 * inv[:, k:k + 1] * src[None, :]
        T[:, L] = acc
    return T


@njit(cache=True)
def _g_rhs_nb(x, G, beta, a, c, shift):
    m = beta.shape[0]
    N = 1 << m
    y = beta * x
    T = _second_derivs_nb(y, G, a, c)
    out = np.empty(N)
    for J in range(N):
        acc = shift * G[J]
        for i in range(m):
            bi = 1 << i
            if J & bi:
                acc += T[i, J ^ bi] / x
            else:
                acc += beta[i] * G[J | bi]
        out[J] = acc
    return out


def _g_rhs_np(x, G, beta, a, c, shift):
    m = beta.shape[0]
    N = 1 << m
    J = np.arange(N)
    T = _second_derivs_np(beta * x, G, a, c)
    out = shift * G
    for i in range(m):
        bi = 1 << i
        ini = (J & bi) != 0
        out = out + np.where(ini, T[i, J ^ bi] / x, beta[i] * G[J | bi])
    return out


# ---------------------------------------------------------------------------
# dispatch

def zonal_block(trans_ptr, trans_idx, trans_w, rho, dom, diag, use_numba=None):
    fn = _zonal_block_nb if _pick(use_numba) else _zonal_block_np
    return fn(trans_ptr, trans_idx, trans_w, rho, dom, diag)


def deriv_dp(pw, dpw, masks, layout, use_numba=None):
    """``S[s, j] = d_{masks[j]} M_{state s}(z)``, from power tables of ``z``.

    ``pw[p, d] = z_p**d`` and ``dpw[p, d] = d * z_p**(d-1)``.  ``layout`` is
    a ``StateLayout`` from ``series``.
    """
    masks = np.ascontiguousarray(masks, dtype=np.int64)
    if _pick(use_numba):
        return _deriv_dp_nb(pw, dpw, masks, layout.trans_ptr, layout.trans_d,
                            layout.trans_parent, layout.root)
    return _deriv_dp_np(pw, dpw, masks, layout.trans_ptr, layout.trans_d,
                        layout.trans_parent, layout.root, layout.groups)


def second_derivs(y, F, a, c, use_numba=None):
    y = np.ascontiguousarray(y, dtype=float)
    F = np.ascontiguousarray(F, dtype=float)
    fn = _second_derivs_nb if _pick(use_numba) else _second_derivs_np
    return fn(y, F, float(a), float(c))


def g_rhs(x, G, beta, a, c, shift, use_numba=None):
    fn = _g_rhs_nb if _pick(use_numba) else _g_rhs_np
    return fn(float(x), G, beta, float(a), float(c), float(shift))


def _pick(use_numba):
    if use_numba is None:
        return _accel.USE_NUMBA
    if use_numba and not _accel.HAVE_NUMBA:
        raise RuntimeError("numba requested but unavailable or disabled")
    return bool(use_numba)
