"""Zonal-polynomial series of 1F1(a; c; Y) and its derivatives near the origin.

The function is expanded in monomial symmetric polynomials,

    1F1(a; c; Y) = sum_k sum_{lam |- k} q_lam(a, c) M_lam(y),
    q_lam = sum_{kappa >= lam} (a)_kappa c_{kappa,lam} / ((c)_kappa k!),

where ``c_{kappa,lam}`` are the coefficients of the C-normalized zonal
polynomial in the monomial basis.  Those come from James' recurrence, seeded
with the hook-length formula for the diagonal entry.  Only partitions with at
most ``m`` parts matter, and the recurrence closes over them.
"""
import itertools
import logging
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import PoleError, SingularPointError
from .partitions import (
    factorial_product, gen_pochhammer, hook_product_upper,
    partitions_of, rho,
)

log = logging.getLogger(__name__)

#: keep the derivative DP table below this many float64 entries (64 MB)
MAX_DP_ENTRIES = 8_000_000
#: largest zonal block (partitions of one weight) we are willing to build
MAX_BLOCK = 3000


@dataclass(frozen=True)
class HypParams:
    a: float
    c: float

    def check(self, degree, m):
        """Refuse ``c`` on a pole of (c)_kappa for any kappa the truncation touches."""
        half = Fraction(1, 2) if isinstance(self.c, Fraction) else 0.5
        for i in range(min(m, degree)):
            # row i+1 of a partition of weight <= degree has at most degree // (i+1) boxes
            for j in range(degree // (i + 1)):
                if self.c - i * half + j == 0:
                    raise PoleError(f"(c)_kappa vanishes for c={self.c}: any kappa with "
                                    f"at least {j + 1} boxes in row {i + 1}")
        return self


@dataclass(frozen=True)
class TruncationConfig:
    degree: int
    m: int

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("truncation degree must be >= 1")
        if self.m < 1:
            raise ValueError("dimension must be >= 1")


# ---------------------------------------------------------------------------
# zonal coefficient tables

@lru_cache(maxsize=None)
def _block(k, m):
    parts = partitions_of(k, m)
    index = {p: n for n, p in enumerate(parts)}
    n = len(parts)
    rhos = np.array([rho(p) for p in parts], dtype=float)
    cum = np.zeros((n, max(m, 1)), dtype=np.int64)
    for r, p in enumerate(parts):
        cum[r, :len(p)] = np.cumsum(p)
        cum[r, len(p):] = k
    # dom[r, s] <=> parts[s] is dominated by parts[r]
    dom = np.ones((n, n), dtype=bool)
    for col in range(cum.shape[1]):
        dom &= cum[:, None, col] >= cum[None, :, col]
    ptr, idx, wts = [0], [], []
    for lam in parts:
        acc = {}
        L = len(lam)
        for i in range(L):
            for j in range(i + 1, L):
                for t in range(1, lam[j] + 1):
                    mu = list(lam)
                    mu[i] += t
                    mu[j] -= t
                    mu = tuple(sorted((x for x in mu if x), reverse=True))
                    acc[index[mu]] = acc.get(index[mu], 0) + lam[i] - lam[j] + 2 * t
        for key in sorted(acc):
            idx.append(key)
            wts.append(acc[key])
        ptr.append(len(idx))
    diag = [Fraction(2 ** k * math.factorial(k), hook_product_upper(p)) for p in parts]
    return {
        "parts": parts, "index": index, "rho": rhos, "dom": dom,
        "ptr": np.array(ptr, dtype=np.int64), "idx": np.array(idx, dtype=np.int64),
        "w": np.array(wts, dtype=float), "w_int": wts, "diag": diag,
    }


@lru_cache(maxsize=None)
def zonal_to_monomial_coeffs(k, m):
    """Exact c_{kappa,lam} for all kappa, lam |- k with at most ``m`` parts.

    Returns ``(partitions, rows)`` where ``rows[r][s]`` is the Fraction
    multiplying M_{partitions[s]} in C_{partitions[r]}.
    """
    b = _block(k, m)
    parts, ptr, idx, w = b["parts"], b["ptr"], b["idx"], b["w_int"]
    n = len(parts)
    rows = []
    for r in range(n):
        row = [Fraction(0)] * n
        row[r] = b["diag"][r]
        for s in range(r + 1, n):
            if not b["dom"][r, s]:
                continue
            acc = sum((w[t] * row[idx[t]] for t in range(ptr[s], ptr[s + 1])), Fraction(0))
            row[s] = acc / (rho(parts[r]) - rho(parts[s]))
        rows.append(tuple(row))
    return parts, tuple(rows)


@lru_cache(maxsize=None)
def zonal_matrix(k, m):
    """Float version of :func:`zonal_to_monomial_coeffs`, built by the kernel.

    Every term of the recurrence is nonnegative, so the float recursion has
    no cancellation and matches the exact table to a few ulps.
    """
    b = _block(k, m)
    diag = np.array([float(d) for d in b["diag"]])
    C = kernels.zonal_block(b["ptr"], b["idx"], b["w"], b["rho"], b["dom"], diag)
    C.setflags(write=False)
    return C


def zonal_eval(kappa, y):
    """C_kappa(y) through the monomial expansion (float)."""
    m = len(y)
    if len(kappa) > m:
        return 0.0
    k = sum(kappa)
    b = _block(k, m)
    C = zonal_matrix(k, m)
    row = C[b["index"][tuple(kappa)]]
    return float(sum(row[s] * monomial_symmetric(lam, y) for s, lam in enumerate(b["parts"]) if row[s]))


# ---------------------------------------------------------------------------
# monomial symmetric polynomials

def monomial_symmetric(lam, y):
    """M_lam(y): the sum of all distinct monomials with exponent multiset ``lam``."""
    lam = tuple(p for p in lam if p)
    y = tuple(y)
    if len(lam) > len(y):
        return 0

    @lru_cache(maxsize=None)
    def rec(mu, p):
        if not mu:
            return 1
        if len(mu) > p:
            return 0
        out = rec(mu, p - 1)
        for d in sorted(set(mu)):
            rest = list(mu)
            rest.remove(d)
            out = out + y[p - 1] ** d * rec(tuple(rest), p - 1)
        return out

    return rec(lam, len(y))


# ---------------------------------------------------------------------------
# hypergeometric coefficients in the monomial basis

def _coeff_ratio(a, c, kappa, k):
    """(a)_kappa / ((c)_kappa k!) in floating point, overflow safe."""
    lr, sign = -math.lgamma(k + 1), 1.0
    for i, part in enumerate(kappa):
        for j in range(part):
            num = a - i / 2 + j
            den = c - i / 2 + j
            if den == 0:
                raise PoleError(f"(c)_kappa = 0 for kappa={kappa} (c={c})")
            if num == 0:
                return 0.0
            lr += math.log(abs(num)) - math.log(abs(den))
            if (num < 0) != (den < 0):
                sign = -sign
    return sign * math.exp(lr)


def q_coefficient(lam, params):
    """q_lam(a, c), exact when ``params`` holds Fractions, float otherwise."""
    lam = tuple(lam)
    k = sum(lam)
    if k == 0:
        return Fraction(1) if isinstance(params.a, Fraction) else 1.0
    parts, rows = zonal_to_monomial_coeffs(k, len(lam))
    s = parts.index(lam)
    exact = isinstance(params.a, Fraction) and isinstance(params.c, Fraction)
    total = Fraction(0) if exact else 0.0
    fact = math.factorial(k)
    for r, kappa in enumerate(parts):
        coeff = rows[r][s]
        if not coeff:
            continue
        den = gen_pochhammer(params.c, kappa)
        if den == 0:
            raise PoleError(f"(c)_kappa = 0 for kappa={kappa} (c={params.c})")
        if exact:
            total += gen_pochhammer(params.a, kappa) * coeff / (den * fact)
        else:
            total += float(coeff) * _coeff_ratio(params.a, params.c, kappa, k)
    return total


def _hook_weight(kappa):
    l = len(kappa)
    num = 1
    for i in range(l):
        for j in range(i + 1, l):
            num *= 2 * kappa[i] - 2 * kappa[j] - i + j
    den = 1
    for i, part in enumerate(kappa):
        den *= math.factorial(2 * part + l - i - 1)
    return Fraction(num, den)


def _poch_ratio(params, kappa):
    a, c = params.a, params.c
    if isinstance(a, Fraction) and isinstance(c, Fraction):
        den = gen_pochhammer(c, kappa)
        if den == 0:
            raise PoleError(f"(c)_kappa = 0 for kappa={kappa} (c={c})")
        return gen_pochhammer(a, kappa) / den
    return _coeff_ratio(a, c, kappa, 0)


def q_ones_closed_form(k, params):
    """q_(1^k)(a, c) from the hook-type closed form."""
    if k < 1:
        raise ValueError("k >= 1 required")
    total = sum(_hook_weight(kp) * _poch_ratio(params, kp) for kp in partitions_of(k))
    return 2 ** k * math.factorial(k) * total


def q_two_ones_closed_form(k, params):
    """q_(2,1^(k-2))(a, c) from the closed form."""
    if k < 2:
        raise ValueError("k >= 2 required")
    total = sum(_hook_weight(kp) * (math.comb(k, 2) + rho(kp)) * _poch_ratio(params, kp)
                for kp in partitions_of(k))
    return 2 ** k * math.factorial(k - 2) * total


@lru_cache(maxsize=64)
def _q_blocks(a, c, K, m):
    out = []
    for k in range(K + 1):
        parts = partitions_of(k, m)
        if k == 0:
            out.append(np.ones(1))
            continue
        ratios = np.array([_coeff_ratio(a, c, kp, k) for kp in parts])
        out.append(ratios @ zonal_matrix(k, m))
    return tuple(out)


def q_table(params, degree, m):
    """Float q_lam for every lam of weight <= degree with at most m parts.

    Returned as a tuple indexed by weight; entry k is aligned with
    ``partitions_of(k, m)``.
    """
    return _q_blocks(float(params.a), float(params.c), int(degree), int(m))


# ---------------------------------------------------------------------------
# state layout for the derivative DP

class StateLayout:
    """All partitions of weight <= K with at most m parts, heaviest first.

    For each state ``mu`` and each distinct part ``d`` of it, there is a
    transition to ``mu`` with one copy of ``d`` removed.  Removing a part
    always lands on a lighter state, so a sweep in storage order sees each
    parent before it is overwritten.
    """

    def __init__(self, K, m):
        self.K, self.m = K, m
        states = []
        for k in range(K, -1, -1):
            states.extend(partitions_of(k, m))
        self.states = states
        self.index = {s: n for n, s in enumerate(states)}
        self.root = self.index[()]
        ptr, tds, tpar = [0], [], []
        for s in states:
            for d in sorted(set(s)):
                rest = list(s)
                rest.remove(d)
                tds.append(d)
                tpar.append(self.index[tuple(rest)])
            ptr.append(len(tds))
        self.trans_ptr = np.array(ptr, dtype=np.int64)
        self.trans_d = np.array(tds, dtype=np.int64)
        self.trans_parent = np.array(tpar, dtype=np.int64)
        self.weights = np.array([sum(s) for s in states])
        groups = []
        for k in range(K, -1, -1):
            rows = np.nonzero(self.weights == k)[0]
            lo, hi = self.trans_ptr[rows[0]], self.trans_ptr[rows[-1] + 1]
            counts = np.diff(self.trans_ptr[rows[0]:rows[-1] + 2])
            t_local = np.repeat(np.arange(len(rows)), counts)
            groups.append((rows, t_local, self.trans_d[lo:hi], self.trans_parent[lo:hi]))
        self.groups = groups

    def __len__(self):
        return len(self.states)

    def q_vector(self, params):
        blocks = q_table(params, self.K, self.m)
        return np.concatenate([blocks[k] for k in range(self.K, -1, -1)])


@lru_cache(maxsize=16)
def state_layout(K, m):
    return StateLayout(K, m)


def count_states(K, m):
    return sum(len(partitions_of(k, m)) for k in range(K + 1))


def _power_tables(y, K):
    y = np.asarray(y, dtype=float)
    d = np.arange(K + 1)
    with np.errstate(all="ignore"):
        pw = y[:, None] ** d[None, :]
        dpw = np.zeros_like(pw)
        dpw[:, 1:] = d[None, 1:] * y[:, None] ** (d[None, 1:] - 1)
    pw[:, 0] = 1.0
    dpw[:, 1] = 1.0
    return np.ascontiguousarray(pw), np.ascontiguousarray(dpw)


def hyp1f1_series(params, y, cfg):
    """Truncated sum_{k <= K} sum_{lam |- k} q_lam M_lam(y)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    m = len(y)
    if cfg.m != m:
        raise ValueError(f"point has {m} coordinates, config says m={cfg.m}")
    params.check(cfg.degree, m)
    layout = state_layout(cfg.degree, m)
    pw, dpw = _power_tables(y, cfg.degree)
    S = kernels.deriv_dp(pw, dpw, np.zeros(1, dtype=np.int64), layout)
    return float(layout.q_vector(params) @ S[:, 0])


def block_sums(params, y, cfg):
    """Contribution of each total degree k <= K to the series at ``y``."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    layout = state_layout(cfg.degree, len(y))
    pw, dpw = _power_tables(y, cfg.degree)
    S = kernels.deriv_dp(pw, dpw, np.zeros(1, dtype=np.int64), layout)[:, 0]
    terms = layout.q_vector(params) * S
    return np.bincount(layout.weights, weights=terms, minlength=cfg.degree + 1)


def degree_fits(K, m):
    """True if the tables for truncation degree K stay within the memory budget."""
    return (len(partitions_of(K, m)) <= MAX_BLOCK
            and count_states(K, m) * 2 ** m <= MAX_DP_ENTRIES)


def choose_degree(params, y, rtol=1e-13, max_degree=None):
    """Smallest K whose last degree block is below ``rtol`` relative, plus m.

    The extra m degrees cover the derivatives, which lose one degree per
    differentiation.  Blocks are measured at ``|y|``.  The search stops at
    the largest degree that fits the memory budget (or ``max_degree``) and
    warns if the tolerance was not reached by then.
    """
    y = np.abs(np.atleast_1d(np.asarray(y, dtype=float)))
    m = len(y)
    K_try, last = 8, None
    while True:
        if max_degree is not None:
            K_try = min(K_try, max_degree)
        while K_try > 1 and not degree_fits(K_try, m):
            K_try -= 1
        sums = np.abs(block_sums(params, y, TruncationConfig(K_try, m)))
        total = np.cumsum(sums)
        for K in range(1, K_try + 1):
            if sums[K] <= rtol * total[K] and sums[K] <= sums[K - 1]:
                return K + m if degree_fits(K + m, m) else K_try
        if K_try == last or (max_degree is not None and K_try >= max_degree):
            break
        last = K_try
        K_try *= 2
    warnings.warn(f"series truncation capped at degree {K_try}; initial values may be "
                  "inaccurate, consider a smaller starting point", RuntimeWarning, stacklevel=2)
    return K_try


def squarefree_derivatives_at(params, y0, cfg, mode="series", eps_rel=1e-8):
    """Vector of d_J F(y0) for all subsets J, in bitmask order.

    ``mode="series"`` differentiates the truncated series exactly;
    ``mode="linear"`` uses only the constant and linear terms, which is
    accurate to O(|y0|^2) and needs just q_(1^l) and q_(2,1^(l-1)).
    """
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    m = len(y0)
    if mode == "linear":
        return _linear_derivatives(params, y0)
    if mode != "series":
        raise ValueError(f"unknown mode {mode!r}")
    check_distinct(y0, eps_rel, allow_zero=True)
    params.check(cfg.degree, m)
    layout = state_layout(cfg.degree, m)
    pw, dpw = _power_tables(y0, cfg.degree)
    S = kernels.deriv_dp(pw, dpw, np.arange(2 ** m, dtype=np.int64), layout)
    return layout.q_vector(params) @ S


def _linear_derivatives(params, y):
    m = len(y)
    ones = [1.0] + [float(q_ones_closed_form(l, params)) for l in range(1, m + 2)]
    twos = [0.0, 0.0] + [float(q_two_ones_closed_form(l, params)) for l in range(2, m + 2)]
    out = np.empty(2 ** m)
    for J in range(2 ** m):
        inside = sum(y[i] for i in range(m) if J >> i & 1)
        outside = sum(y[i] for i in range(m) if not J >> i & 1)
        l = bin(J).count("1")
        val = ones[l]
        if l > 0:
            val += 2 * twos[l + 1] * inside
        if l < m:
            val += ones[l + 1] * outside
        out[J] = val
    return out


def check_distinct(y, eps_rel=1e-8, allow_zero=False):
    """Raise SingularPointError if coordinates tie (or vanish, unless allowed)."""
    y = np.asarray(y, dtype=float)
    scale = float(np.max(np.abs(y))) if y.size else 0.0
    if scale == 0.0 and not allow_zero:
        raise SingularPointError("evaluation point is the origin")
    thr = eps_rel * scale
    if not allow_zero and np.any(np.abs(y) <= thr):
        raise SingularPointError(f"coordinate vanishes at y={y.tolist()}")
    for i in range(len(y)):
        for j in range(i + 1, len(y)):
            if abs(y[i] - y[j]) <= thr:
                raise SingularPointError(
                    f"tied coordinates y[{i}]={y[i]!r}, y[{j}]={y[j]!r}")
    return y


def rect_derivative_series(tau, params, y, cfg):
    """d^tau 1F1 at y for a rectangular tau = (t^l), acting on y_1..y_l.

    Direct transcription of the splitting lemma: every lam containing tau is
    cut into a piece kappa with exactly l parts (all >= t) and a rest nu.
    This path is slow and exists to cross-check the derivative DP.
    """
    tau = tuple(tau)
    if not tau:
        return hyp1f1_series(params, y, cfg)
    t, l = tau[0], len(tau)
    if any(p != t for p in tau):
        raise ValueError(f"{tau} is not rectangular")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    m = len(y)
    if l > m:
        raise ValueError("tau has more rows than variables")
    params.check(cfg.degree, m)
    head, tail = tuple(y[:l]), tuple(y[l:])
    qs = q_table(params, cfg.degree, m)
    total = 0.0
    for k in range(t * l, cfg.degree + 1):
        for s, lam in enumerate(partitions_of(k, m)):
            if len(lam) < l or lam[l - 1] < t:
                continue
            seen = set()
            for pick in itertools.combinations(range(len(lam)), l):
                kappa = tuple(lam[i] for i in pick)
                if kappa in seen or kappa[-1] < t:
                    continue
                seen.add(kappa)
                nu = tuple(lam[i] for i in range(len(lam)) if i not in pick)
                if len(nu) > m - l:
                    continue
                factor = factorial_product(kappa) // factorial_product(tuple(p - t for p in kappa))
                total += (qs[k][s] * factor * monomial_symmetric(tuple(p - t for p in kappa), head)
                          * monomial_symmetric(nu, tail))
    return total


def dump_tables(K, m, params=None, stream=None):
    """Write c_{kappa,lam} (and q_lam if params are given) as TSV.

    Partitions are written as ``k1.k2.k3``, the empty one as ``0``; numbers
    are exact rationals ``p/q``.  Exact q needs Fraction parameters.
    """
    lines = ["# table\tk\tkappa\tlambda\tvalue"]
    fmt = lambda p: ".".join(map(str, p)) if p else "0"
    rat = lambda x: f"{x.numerator}/{x.denominator}"
    for k in range(1, K + 1):
        parts, rows = zonal_to_monomial_coeffs(k, m)
        for r, kappa in enumerate(parts):
            for s, lam in enumerate(parts):
                if rows[r][s]:
                    lines.append(f"c\t{k}\t{fmt(kappa)}\t{fmt(lam)}\t{rat(rows[r][s])}")
    if params is not None:
        p = HypParams(Fraction(params.a), Fraction(params.c))
        for k in range(0, K + 1):
            for lam in partitions_of(k, m):
                lines.append(f"q\t{k}\t-\t{fmt(lam)}\t{rat(Fraction(q_coefficient(lam, p)))}")
    text = "\n".join(lines) + "\n"
    if stream is not None:
        stream.write(text)
    return text
