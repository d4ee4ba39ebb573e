"""Stable (LS) and sign-consistent (NNLS) quadrature weights on prescribed nodes."""

from .core import (
    TEST_FUNCTIONS,
    WEIGHTS,
    Interval,
    Method,
    NodeSet,
    QuadRule,
    TestFunction,
    WeightFn,
    apply_rule,
    get_weight,
    make_equidistant,
    make_scattered,
    sign,
)
from .diagnostics import (
    build_rule,
    integration_error,
    k_omega,
    kappa,
    minimal_stable_n,
    power_law_fit,
    reference_integral,
    sign_consistency_measure,
    trapezoid_rule,
)
from .dop import build_dop_basis, discrete_chebyshev_eval, eval_dop, h_k, k_of_n, n_of_d
from .moments import compute_moments, gauss_legendre
from .solvers import exactness_residual, lawson_hanson, ls_weights, nnls_weights

__version__ = "0.1.0"
