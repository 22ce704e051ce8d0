"""Largest-eigenvalue distribution of a real Wishart matrix W_m(n, Sigma).

With Sigma = diag(1 / (2 beta_i)) the CDF is

    Pr[l1 < x] = C exp(-x sum beta) x^(mn/2) 1F1((m+1)/2; (n+m+1)/2; beta x),
    C = Gamma_m(a) / Gamma_m(c) * prod beta_i^(n/2).

The vector G(x) = C exp(-x sum beta) x^(mn/2) dF(beta x) is integrated from a
small x0 (series initial values) to x, so the first entry is the probability.
The constant is folded into the state in log space, which keeps every
entry O(1) even when 1F1 itself would overflow.
"""
import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize, special, stats
from scipy.integrate import quad as _quad

from . import diagonal, series
from .errors import BracketError, PoleError
from .ode import IntegrationPlan, integrate, integrate_with_trace
from .pfaffian import TIE_EPS, radial_rhs, wishart_params
from .series import HypParams, TruncationConfig

log = logging.getLogger("hgm1f1")

TIE_POLICIES = ("perturb", "diagonal", "error")
OUTPUT_FORMATS = ("tsv", "csv", "json-lines")
#: relative spread used when tied beta are pulled apart
TIE_PERTURB = 1e-6
#: overshoot beyond 1 that triggers an accuracy warning
OVERSHOOT_TOL = 1e-4
#: spreads for the centered-spread extrapolation (a cross-check route for equal beta)
LOWER_BOUND_SPREADS = (0.2, 0.1, 0.05)


@dataclass(frozen=True)
class WishartProblem:
    """Dimension, degrees of freedom and beta = diag(Sigma^-1) / 2, sorted ascending."""
    m: int
    n: float
    beta: tuple

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        if not self.n > self.m - 1:
            raise ValueError(f"n must exceed m - 1 = {self.m - 1}, got {self.n!r}")
        b = tuple(sorted(float(v) for v in self.beta))
        if len(b) != self.m:
            raise ValueError(f"beta needs {self.m} entries, got {len(b)}")
        if not all(v > 0 and math.isfinite(v) for v in b):
            raise ValueError("beta entries must be positive and finite")
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n", float(self.n))

    @classmethod
    def from_sigma(cls, sigma2, n):
        """Build from the diagonal variances sigma_i^2 of Sigma."""
        sigma2 = [float(s) for s in sigma2]
        if not all(s > 0 for s in sigma2):
            raise ValueError("variances must be positive")
        return cls(len(sigma2), n, tuple(1 / (2 * s) for s in sigma2))

    @property
    def params(self):
        return wishart_params(self.m, self.n)

    @property
    def beta_array(self):
        return np.array(self.beta)

    def all_equal(self):
        return max(self.beta) - min(self.beta) <= TIE_EPS * max(self.beta)

    def has_ties(self):
        b = self.beta
        return any(b[i + 1] - b[i] <= TIE_EPS * b[i + 1] for i in range(self.m - 1))


@dataclass(frozen=True)
class HgmConfig:
    """Numerical knobs.  ``None`` means "choose automatically".

    Without an explicit ``step`` the integrator is adaptive RK4 with
    relative tolerance ``rel_tol``; with one, fixed-step RK4 (or
    ``method``) is used exactly as given.
    """
    K: int = None
    x0: float = None
    step: float = None
    method: str = None
    rel_tol: float = 1e-9
    tie_policy: str = "perturb"
    output_format: str = "tsv"

    def __post_init__(self):
        for name in ("K", "x0", "step", "rel_tol"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive, got {v!r}")
        if self.K is not None and int(self.K) != self.K:
            raise ValueError(f"K must be an integer, got {self.K!r}")
        if self.tie_policy not in TIE_POLICIES:
            raise ValueError(f"tie_policy must be one of {TIE_POLICIES}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"output_format must be one of {OUTPUT_FORMATS}")
        if self.method is not None:
            IntegrationPlan(0.0, 1.0, 1.0, self.method)

    def start(self, m, beta_max=None):
        """Series start point; the default keeps beta_max * x0 <= 1 so the series stays short."""
        if self.x0 is not None:
            return self.x0
        x0 = max(0.01, 0.002 * m * m)
        return min(x0, 1 / beta_max) if beta_max else x0

    def plan(self, x0, x1):
        if self.step is None:
            method = self.method or "rk4_adaptive"
            step = max(abs(x1 - x0), 1e-300) / 100 if method == "rk4_adaptive" else 1e-3
            return IntegrationPlan(x0, x1, step, method, self.rel_tol)
        return IntegrationPlan(x0, x1, self.step, self.method or "rk4", self.rel_tol)


def multivariate_gamma(m, a):
    """log Gamma_m(a) = m(m-1)/4 log(pi) + sum_i log Gamma(a - (i-1)/2)."""
    args = [a - i / 2 for i in range(m)]
    for t in args:
        if t <= 0 and float(t).is_integer():
            raise PoleError(f"Gamma_{m}({a}) has a pole: argument {t} is a non-positive integer")
    return m * (m - 1) / 4 * math.log(math.pi) + float(sum(special.gammaln(t) for t in args))


def log_constant(prob):
    p = prob.params
    return (multivariate_gamma(prob.m, p.a) - multivariate_gamma(prob.m, p.c)
            + prob.n / 2 * float(np.sum(np.log(prob.beta))))


def chi2_cdf(x, n):
    """P(chi^2_n <= x) as the regularized lower incomplete gamma function."""
    if not n > 0:
        raise ValueError("degrees of freedom must be positive")
    if x <= 0:
        return 0.0
    return float(special.gammainc(n / 2, x / 2))


def kummer_check(params, y, K=30):
    """|exp(-sum y) 1F1(a; c; y) - 1F1(c - a; c; -y)| from truncated series."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    cfg = TruncationConfig(K, len(y))
    other = HypParams(params.c - params.a, params.c)
    lhs = math.exp(-float(y.sum())) * series.hyp1f1_series(params, y, cfg)
    rhs = series.hyp1f1_series(other, -y, cfg)
    return abs(lhs - rhs)


def _resolve_ties(prob, cfg):
    """Problem actually integrated, or None when the diagonal route applies."""
    if not prob.has_ties():
        return prob
    if prob.m > 1 and prob.all_equal() and cfg.tie_policy in ("perturb", "diagonal"):
        return None
    if prob.m == 1:
        return prob
    if cfg.tie_policy != "perturb":
        raise ValueError(f"tied beta {prob.beta} are singular for the Pfaffian system "
                         f"(tie_policy={cfg.tie_policy!r})")
    b = tuple(v * (1 + i * TIE_PERTURB) for i, v in enumerate(prob.beta))
    warnings.warn(f"tied beta perturbed by relative {TIE_PERTURB:g} per index; "
                  "expect reduced accuracy", RuntimeWarning, stacklevel=3)
    return replace(prob, beta=b)


def _log_prefactor(prob, x, lc):
    return lc - x * sum(prob.beta) + prob.m * prob.n / 2 * math.log(x)


def _series_cdf(prob, x, cfg):
    y = prob.beta_array * x
    K = cfg.K or series.choose_degree(prob.params, y)
    F = series.hyp1f1_series(prob.params, y, TruncationConfig(K, prob.m))
    return math.exp(_log_prefactor(prob, x, log_constant(prob))) * F


def _diagonal_cdf(prob, xs, cfg):
    b = prob.beta[0]
    lc = log_constant(prob)
    out = []
    for x in xs:
        plan = None if cfg.step is None else IntegrationPlan(1.0, 2.0, cfg.step, cfg.method or "rk4")
        lf = diagonal.log_hyp1f1_diagonal(prob.params, b * x, prob.m, plan)
        out.append(math.exp(_log_prefactor(prob, x, lc) + lf))
    return out


def initial_state(prob, x0, K=None):
    """G(x0) = C exp(-x0 sum beta) x0^(mn/2) dF(beta x0) over all subsets."""
    y0 = prob.beta_array * x0
    K = K or series.choose_degree(prob.params, y0)
    F0 = series.squarefree_derivatives_at(prob.params, y0, TruncationConfig(K, prob.m),
                                          eps_rel=TIE_EPS)
    return F0 * math.exp(_log_prefactor(prob, x0, log_constant(prob))), K


def _finish(p, x, clamp):
    if not math.isfinite(p):
        from .errors import IntegrationError
        raise IntegrationError(f"non-finite probability at x={x}")
    if p > 1 + OVERSHOOT_TOL or p < -OVERSHOOT_TOL:
        warnings.warn(f"probability {p:.10g} at x={x:g} is outside [0, 1] beyond tolerance; "
                      "try a smaller step or a larger K", RuntimeWarning, stacklevel=3)
    return min(1.0, max(0.0, p)) if clamp else p


def cdf_curve(xs, prob, cfg=HgmConfig(), clamp=True):
    """Pr[l1 < x] for every x in the increasing sequence ``xs``, in one integration pass."""
    xs = [float(x) for x in xs]
    if not xs:
        return []
    if any(x <= 0 for x in xs):
        raise ValueError("x must be positive")
    if any(b < a for a, b in zip(xs[:-1], xs[1:])):
        raise ValueError("x grid must be nondecreasing")
    work = _resolve_ties(prob, cfg)
    if work is None and prob.m <= 3:
        log.info("all beta equal, m=%d: diagonal ODE route", prob.m)
        return [_finish(p, x, clamp) for p, x in zip(_diagonal_cdf(prob, xs, cfg), xs)]
    if work is None:
        log.info("all beta equal, m=%d: skew-symmetric determinant route", prob.m)
        return [_finish(p, x, clamp) for p, x in zip(isotropic_cdf(xs, prob.m, prob.n, prob.beta[0]), xs)]
    x0 = cfg.start(prob.m, max(work.beta))
    out = [None] * len(xs)
    below = [i for i, x in enumerate(xs) if x <= x0]
    for i in below:
        out[i] = _series_cdf(work, xs[i], cfg)
    above = [x for x in xs if x > x0]
    if above:
        G0, K = initial_state(work, x0, cfg.K)
        log.info("m=%d K=%d x0=%g states=%d", work.m, K, x0, len(G0))
        rhs = radial_rhs(work.beta_array, work.params, work.n)
        trace = integrate_with_trace(rhs, G0, cfg.plan(x0, above[-1]), above)
        vals = iter(v[0] for _, v in trace)
        for i, x in enumerate(xs):
            if x > x0:
                out[i] = float(next(vals))
    return [_finish(p, x, clamp) for p, x in zip(out, xs)]


def cdf_largest_root(x, prob, cfg=HgmConfig(), clamp=True):
    """Pr[l1 < x] for the largest eigenvalue of W_m(n, diag(1 / (2 beta)))."""
    return cdf_curve([x], prob, cfg, clamp)[0]


def quantile(p, prob, cfg=HgmConfig(), tol_p=1e-7, x_max=1e6):
    """Smallest x with Pr[l1 < x] = p, to |cdf(x) - p| < tol_p.

    The chi-square upper bound gives a point that is never above the
    answer; the bracket is grown from there by doubling.
    """
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    sigma1 = 1 / (2 * min(prob.beta))
    lo = sigma1 * float(special.gammaincinv(prob.n / 2, p)) * 2
    f_lo = cdf_largest_root(lo, prob, cfg, clamp=False) - p
    if abs(f_lo) < tol_p:
        return lo
    if f_lo > 0:
        # can only happen through integration error; walk down instead
        hi, lo = lo, lo / 2
        while cdf_largest_root(lo, prob, cfg, clamp=False) > p:
            lo /= 2
            if lo < 1e-12:
                raise BracketError(f"could not bracket p={p} from below")
    else:
        hi = lo * 2
        while cdf_largest_root(hi, prob, cfg, clamp=False) < p:
            lo, hi = hi, hi * 2
            if hi > x_max:
                raise BracketError(f"p={p} not reached below x_max={x_max:g}")

    def g(x):
        return cdf_largest_root(x, prob, cfg, clamp=False) - p

    x, r = optimize.brentq(g, lo, hi, xtol=1e-12, rtol=1e-10, full_output=True)
    if not r.converged or abs(g(x)) >= tol_p:
        raise BracketError(f"quantile search for p={p} did not reach |cdf - p| < {tol_p}")
    return x


def upper_bound(x, prob):
    """chi^2_n CDF at x / sigma_1^2, sigma_1^2 = 1 / (2 min beta)."""
    return chi2_cdf(2 * x * min(prob.beta), prob.n)


def lower_bound(x, prob, cfg=HgmConfig()):
    """CDF under Sigma = sigma_1^2 I, the most spread-out isotropic case."""
    b = min(prob.beta)
    iso = replace(prob, beta=(b,) * prob.m)
    if prob.m == 1:
        return cdf_largest_root(x, iso, cfg)
    return cdf_largest_root(x, iso, replace(cfg, tie_policy="diagonal"))


def isotropic_cdf(xs, m, n, b):
    """Pr[l1 < x] for Sigma = I / (2b), from the eigenvalue density directly.

    Integrating the ordered eigenvalue density over [0, t]^m (t = 2bx) with
    de Bruijn's identity gives Pr = Pf(A(t)) / Pf(A(inf)), where

        A_ij(t) = int int_{[0,t]^2} sign(v - u) p_i(u) p_j(v) du dv

    and p_i is the chi^2 density with n - m - 1 + 2i degrees of freedom (odd
    m borders A with the chi^2 CDFs).  A(inf) is badly conditioned for large
    m, so the ratio is taken as det(I - A(inf)^-1 E) with E = A(inf) - A(t)
    built from survival functions; the conditioning then only scales E.
    """
    xs = [float(x) for x in xs]
    dfs = [n - m - 1 + 2 * i for i in range(1, m + 1)]
    N = m + m % 2
    pdf = [stats.chi2(d).pdf for d in dfs]
    sf = [stats.chi2(d).sf for d in dfs]
    quad = lambda f, lo: _quad(f, lo, np.inf, epsabs=0, epsrel=1e-13, limit=200)[0]
    Ainf = np.zeros((N, N))
    for i in range(m):
        for j in range(i + 1, m):
            # 2 Pr[X_i < X_j] - 1, as -(2 Pr[X_i > X_j] - 1) when that is the small side
            Ainf[i, j] = 1 - 2 * quad(lambda v: pdf[j](v) * sf[i](v), 0)
        if m % 2:
            Ainf[i, m] = 1.0
    Ainf -= Ainf.T
    out = []
    for x in xs:
        t = 2 * b * x
        S = [f(t) for f in sf]
        E = np.zeros((N, N))
        for i in range(m):
            for j in range(i + 1, m):
                E[i, j] = S[j] - S[i] + S[i] * S[j] - 2 * quad(lambda v: pdf[j](v) * sf[i](v), t)
            if m % 2:
                E[i, m] = S[i]
        E -= E.T
        sign, logdet = np.linalg.slogdet(np.eye(N) - np.linalg.solve(Ainf, E))
        out.append(math.exp(0.5 * logdet) if sign > 0 else 0.0)
    return out


def _near_isotropic(x, iso, cfg, spreads=LOWER_BOUND_SPREADS):
    """Equal-beta CDF from centered spreads b (1 + d (i - (m-1)/2)).

    The offsets are symmetric about zero, so the perturbed CDF is an even
    function of d; Richardson extrapolation in d^2 over the halving
    sequence ``spreads`` removes the leading terms.
    """
    m = iso.m
    b = iso.beta[0]
    offs = np.arange(m) - (m - 1) / 2
    vals = []
    for d in spreads:
        beta = tuple(b * (1 + d * offs))
        vals.append(cdf_largest_root(x, replace(iso, beta=beta), cfg, clamp=False))
    # Neville table in h = d^2 towards h = 0
    h = [d * d for d in spreads]
    table = list(vals)
    for level in range(1, len(table)):
        for i in range(len(table) - 1, level - 1, -1):
            table[i] = (h[i - level] * table[i] - h[i] * table[i - 1]) / (h[i - level] - h[i])
    return _finish(table[-1], x, True)


def bounds(x, prob, cfg=HgmConfig()):
    """(lower, upper) with lower <= Pr[l1 < x] <= upper."""
    if not x > 0:
        raise ValueError("x must be positive")
    return lower_bound(x, prob, cfg), upper_bound(x, prob)
