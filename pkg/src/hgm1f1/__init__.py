"""Confluent hypergeometric function 1F1 of a diagonal matrix argument by
the holonomic gradient method, and the largest-eigenvalue distribution of
a real Wishart matrix built on it.
"""
__version__ = "0.1.0"

from ._accel import backend
from .diagonal import hyp1f1_diagonal
from .errors import BracketError, HgmError, IntegrationError, PoleError, SingularPointError
from .ode import IntegrationPlan, integrate, integrate_with_trace
from .pfaffian import apply_pfaffian, g_rhs, pfaffian_matrix
from .series import HypParams, TruncationConfig, hyp1f1_series, zonal_to_monomial_coeffs
from .wishart import (HgmConfig, WishartProblem, bounds, cdf_curve, cdf_largest_root,
                      chi2_cdf, kummer_check, multivariate_gamma, quantile)
