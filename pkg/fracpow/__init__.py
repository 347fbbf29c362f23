"""
fracpow: fractional powers lambda^{-alpha} and L^{-alpha} g by trapezoidal
quadrature under single- and double-exponential transforms.
"""

from .estimates import (
    ErrorEstimate,
    EstimateKind,
    de_estimate_okayama,
    de_estimate_scalar,
    de_operator_estimate,
    de_phi,
    de_phi_at_lambda_star,
    de_phi_at_lambda_star_tau_star,
    de_phi_at_one,
    generic_trapezoid_bound,
    k_alpha,
    se_bound,
    xi,
)
from .exceptions import FracpowError
from .kernel import (
    FractionalOrder,
    QuadratureRule,
    ResolventTerm,
    Transform,
    build_de_rule,
    build_se_rule,
    de_integrand,
    eval_rule,
    se_integrand,
)
from .operator import (
    DenseSPDOperator,
    DiagonalOperator,
    FracpowResult,
    IterativeOperator,
    ShiftedSolveOperator,
    apply_fracpow,
    operator_error_sup,
    scaled_fracpow,
    spectral_oracle,
)
from .params import (
    DEConfig,
    PoleLocation,
    SEParams,
    de_config,
    de_step,
    im_x0_large_lambda,
    im_x0_large_tau,
    lambda_star,
    pole_x0,
    se_params_from_h,
    se_params_from_n,
    sn,
    strip_halfwidth,
    tau_star,
)

__all__ = [
    "DEConfig",
    "DenseSPDOperator",
    "DiagonalOperator",
    "ErrorEstimate",
    "EstimateKind",
    "FractionalOrder",
    "FracpowError",
    "FracpowResult",
    "IterativeOperator",
    "PoleLocation",
    "QuadratureRule",
    "ResolventTerm",
    "SEParams",
    "ShiftedSolveOperator",
    "Transform",
    "apply_fracpow",
    "build_de_rule",
    "build_se_rule",
    "de_config",
    "de_estimate_okayama",
    "de_estimate_scalar",
    "de_integrand",
    "de_operator_estimate",
    "de_phi",
    "de_phi_at_lambda_star",
    "de_phi_at_lambda_star_tau_star",
    "de_phi_at_one",
    "de_step",
    "eval_rule",
    "generic_trapezoid_bound",
    "im_x0_large_lambda",
    "im_x0_large_tau",
    "k_alpha",
    "lambda_star",
    "operator_error_sup",
    "pole_x0",
    "scaled_fracpow",
    "se_bound",
    "se_integrand",
    "se_params_from_h",
    "se_params_from_n",
    "sn",
    "spectral_oracle",
    "strip_halfwidth",
    "tau_star",
    "xi",
]
