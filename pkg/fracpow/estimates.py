"""
A-priori error bounds and estimators.

The SE bound is a proved inequality. The DE quantities (the phi landscape,
the scalar and operator estimators and their closed forms at lambda = 1 and
lambda = lambda*) are estimators and are checked as order-of-magnitude
envelopes, not strict bounds.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Optional

import numpy as np
import numpy.typing as npt

from .exceptions import ParameterDomainError, PreconditionError
from .kernel import HALF_PI, FractionalOrder
from .params import DEFAULT_R, de_constants, de_step, sn, strip_halfwidth
from .validators import (
    validate_at_least,
    validate_half_open_interval,
    validate_integer,
    validate_open_interval,
    validate_positive,
)

logger = logging.getLogger(__name__)


class EstimateKind(str, Enum):
    SE_BOUND = "se_bound"
    DE_SCALAR = "de_scalar"
    DE_OKAYAMA = "de_okayama"
    DE_OPERATOR = "de_operator"
    GENERIC = "generic"


@dataclass(frozen=True)
class ErrorEstimate:
    """
    Value of a bound or estimator together with the inputs it was computed from.

    Attributes:
        value: Finite, nonnegative estimate
        kind: Which formula produced it
        inputs: alpha and whichever of lambda, tau, n, d, r apply
    """

    value: float
    kind: EstimateKind
    inputs: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.value) and self.value >= 0.0):
            raise ParameterDomainError(
                f"{self.kind.value} estimate is not a finite nonnegative number",
                field="value",
                value=self.value,
            )


def discretization_ratio(t: float) -> float:
    """e^{-t} / (2 sinh t), written as e^{-2t} / (1 - e^{-2t})."""
    t = validate_positive(t, "t")
    return math.exp(-2.0 * t) / -math.expm1(-2.0 * t)


def generic_trapezoid_bound(
    Nfd: float,
    d: float,
    h: float,
    C: float,
    beta: float,
    gamma: float,
    M: int,
    N: int,
) -> float:
    """
    Truncated trapezoid bound for f analytic in the strip |Im z| < d.

        Nfd e^{-pi d/h} / (2 sinh(pi d/h)) + (C/beta) e^{-beta M h} + (C/gamma) e^{-gamma N h}
    """
    Nfd = validate_at_least(Nfd, 0.0, "Nfd")
    d = validate_positive(d, "d")
    h = validate_positive(h, "h")
    C = validate_at_least(C, 0.0, "C")
    beta = validate_positive(beta, "beta")
    gamma = validate_positive(gamma, "gamma")
    M = validate_integer(M, field_name="M")
    N = validate_integer(N, field_name="N")

    return (
        Nfd * discretization_ratio(math.pi * d / h)
        + (C / beta) * math.exp(-beta * M * h)
        + (C / gamma) * math.exp(-gamma * N * h)
    )


def se_truncated_bound(
    order: FractionalOrder,
    h: float,
    M: int,
    N: int,
    d: float = HALF_PI,
    *,
    scaled: bool = False,
) -> float:
    """
    SE bound for explicit (h, M, N) before the exponents are balanced.

    With scaled=True the integral error is multiplied by 2 sin(alpha pi)/pi,
    giving the error in lambda^{-alpha}.
    """
    d = validate_half_open_interval(d, 0.0, HALF_PI, "d")
    alpha = order.alpha
    value = generic_trapezoid_bound(
        Nfd=1.0 / order.spread,
        d=d,
        h=h,
        C=1.0,
        beta=2.0 * alpha,
        gamma=2.0 * (1.0 - alpha),
        M=M,
        N=N,
    )
    return order.prefactor * value if scaled else value


def se_bound(order: FractionalOrder, n: int, d: float = HALF_PI) -> ErrorEstimate:
    """
    Balanced SE bound (sin(alpha pi)/pi) (3/(alpha(1-alpha))) exp(-2 sqrt(pi d alpha(1-alpha) n)).

    Examples:
        >>> est = se_bound(FractionalOrder(0.5), 100)
        >>> 8e-10 < est.value < 9e-10
        True
    """
    n = validate_integer(n, min_value=1, field_name="n")
    d = validate_half_open_interval(d, 0.0, HALF_PI, "d")
    alpha = order.alpha
    value = (
        math.sin(alpha * math.pi) / math.pi
        * (3.0 / order.spread)
        * math.exp(-2.0 * math.sqrt(math.pi * d * order.spread * n))
    )
    return ErrorEstimate(value, EstimateKind.SE_BOUND, {"alpha": alpha, "n": n, "d": d})


# =============================================================================
# DE building blocks
# =============================================================================


def xi(d: float) -> float:
    """xi(d) = 2 / (cos d cos((pi/2) sin d)), d in (0, pi/2)."""
    d = validate_open_interval(d, 0.0, HALF_PI, "d")
    return 2.0 / (math.cos(d) * math.cos(HALF_PI * math.sin(d)))


def k_alpha(order: FractionalOrder) -> float:
    """K_alpha = 1/(alpha(1-alpha)) / (1 - e^{-(pi/2) mu e})."""
    return 1.0 / order.spread / -math.expm1(-HALF_PI * order.mu * math.e)


def k_bar_alpha(order: FractionalOrder) -> float:
    """4 (sin(alpha pi)/pi) K_alpha."""
    return 4.0 * math.sin(order.alpha * math.pi) / math.pi * k_alpha(order)


def de_rate(n: int, d: float, order: FractionalOrder) -> float:
    """exp(-2 pi d n / ln(4 d n / mu)); requires the step condition."""
    return math.exp(-2.0 * math.pi * d / de_step(n, d, order))


def de_discretization_factor(n: int, d: float, order: FractionalOrder) -> tuple[float, float]:
    """
    Both sides of the DE discretization inequality.

    Returns:
        (e^{-pi d/h} / (2 sinh(pi d/h)), exp(-2 pi d n / ln(4dn/mu)) / (1 - e^{-(pi/2) mu e}))
    """
    h = de_step(n, d, order)
    lhs = discretization_ratio(math.pi * d / h)
    rhs = de_rate(n, d, order) / -math.expm1(-HALF_PI * order.mu * math.e)
    return lhs, rhs


def de_phi(
    lam: float,
    tau: float,
    n: int,
    order: FractionalOrder,
    r: float = DEFAULT_R,
) -> float:
    """
    phi(lambda, tau) = xi(d) lambda^{-alpha} exp(-2 pi d n / ln(4 d n / mu)).

    d is the exact-pole strip half-width at (lambda, tau).

    Raises:
        PreconditionError: If n is below the step threshold for that d
    """
    d = strip_halfwidth(lam, tau, r)
    return xi(d) * lam ** (-order.alpha) * de_rate(n, d, order)


def de_phi_grid(
    lams: npt.ArrayLike,
    tau: float,
    n: int,
    order: FractionalOrder,
    r: float = DEFAULT_R,
) -> np.ndarray:
    """phi on a grid of lambdas; NaN where the step condition fails."""
    lams = np.asarray(lams, dtype=float)
    values = np.full(lams.shape, np.nan)
    for i, lam in enumerate(lams.flat):
        try:
            values.flat[i] = de_phi(float(lam), tau, n, order, r)
        except PreconditionError:
            continue
    return values


def de_phi_peak(
    tau: float,
    n: int,
    order: FractionalOrder,
    r: float = DEFAULT_R,
    *,
    lambda_max: float = 1e20,
    grid_points: int = 2000,
) -> float:
    """Largest phi(lambda, tau) on a log grid over [tau, lambda_max]."""
    tau = validate_at_least(tau, 1.0, "tau")
    grid = np.logspace(math.log10(tau), math.log10(lambda_max), grid_points)
    values = de_phi_grid(grid, tau, n, order, r)
    if np.all(np.isnan(values)):
        raise PreconditionError(
            "phi is undefined on the whole grid",
            field="n",
            value=n,
        )
    return float(np.nanmax(values))


def de_estimate_scalar(
    lam: float,
    tau: float,
    n: int,
    order: FractionalOrder,
    r: float = DEFAULT_R,
) -> ErrorEstimate:
    """Scalar DE estimator K_alpha phi(lambda, tau)."""
    value = k_alpha(order) * de_phi(lam, tau, n, order, r)
    return ErrorEstimate(
        value,
        EstimateKind.DE_SCALAR,
        {"alpha": order.alpha, "lambda": lam, "tau": tau, "n": n, "r": r},
    )


def de_estimate_okayama(
    lam: float,
    tau: float,
    n: int,
    order: FractionalOrder,
    r: float = DEFAULT_R,
) -> ErrorEstimate:
    """
    Comparison estimator
    (tau^{-alpha}/mu) alpha(1-alpha) (K_alpha xi(d) + e^{(pi/2) nu}) exp(-2 pi d n / ln(4dn/mu)).
    """
    d = strip_halfwidth(lam, tau, r)
    value = (
        tau ** (-order.alpha) / order.mu
        * order.spread
        * (k_alpha(order) * xi(d) + math.exp(HALF_PI * order.nu))
        * de_rate(n, d, order)
    )
    return ErrorEstimate(
        value,
        EstimateKind.DE_OKAYAMA,
        {"alpha": order.alpha, "lambda": lam, "tau": tau, "n": n, "d": d, "r": r},
    )


def de_proposition_bound(
    lam: float,
    tau: float,
    h: float,
    M: int,
    N: int,
    d: float,
    order: FractionalOrder,
) -> float:
    """
    Three-term DE bound for explicit (h, M, N): discretization plus both tails.
    """
    lam = validate_at_least(lam, 1.0, "lambda")
    tau = validate_at_least(tau, 1.0, "tau")
    h = validate_positive(h, "h")
    M = validate_integer(M, field_name="M")
    N = validate_integer(N, field_name="N")
    alpha = order.alpha

    discretization = xi(d) * lam ** (-alpha) / order.spread * discretization_ratio(math.pi * d / h)
    left = (
        tau ** (-alpha) / (2.0 * alpha)
        * math.exp(alpha * HALF_PI)
        * _double_exp_tail(alpha * HALF_PI, M * h)
    )
    right = (
        tau ** (1.0 - alpha) / lam / (2.0 * (1.0 - alpha))
        * math.exp((1.0 - alpha) * HALF_PI)
        * _double_exp_tail((1.0 - alpha) * HALF_PI, N * h)
    )
    return discretization + left + right


def _double_exp_tail(rate: float, x: float) -> float:
    """exp(-rate e^x), 0 once e^x overflows."""
    if x > 700.0:
        return 0.0
    return math.exp(-rate * math.exp(x))


# =============================================================================
# Closed forms at the two error peaks
# =============================================================================


def de_phi_at_lambda_star(
    tau: float,
    n: int,
    order: FractionalOrder,
    r: float = DEFAULT_R,
    *,
    finite_n: bool = False,
) -> float:
    """
    Peak value 2 tau^{-alpha} exp(-3 sqrt(alpha) s_n).

    With finite_n the constant 3 becomes 1 + ln(c2 n)/ln(c2 n sqrt(alpha)/s_n),
    its value before n -> inf.
    """
    tau = validate_at_least(tau, 1.0, "tau")
    s_n = sn(n, order, r)
    root_alpha = math.sqrt(order.alpha)
    factor = 3.0
    if finite_n:
        _, c2 = de_constants(order, r)
        inner = c2 * n * root_alpha / s_n
        if inner <= 1.0:
            raise ParameterDomainError(
                "finite-n peak form needs c2 n sqrt(alpha) / s_n > 1",
                field="n",
                value=n,
            )
        factor = 1.0 + math.log(c2 * n) / math.log(inner)
    return 2.0 * tau ** (-order.alpha) * math.exp(-factor * root_alpha * s_n)


def de_phi_at_one(
    tau: float,
    n: int,
    order: FractionalOrder,
    r: float = DEFAULT_R,
) -> float:
    """Value at lambda = 1, 2 exp(-s_n^2 / ln tau); tau > 1."""
    tau = validate_at_least(tau, 1.0, "tau")
    if tau <= 1.0:
        raise ParameterDomainError("tau must exceed 1", field="tau", value=tau)
    return 2.0 * math.exp(-sn(n, order, r) ** 2 / math.log(tau))


def de_phi_at_lambda_star_tau_star(
    n: int,
    order: FractionalOrder,
    r: float = DEFAULT_R,
) -> float:
    """2 exp(-3.3 sqrt(alpha) s_n)."""
    return 2.0 * math.exp(-3.3 * math.sqrt(order.alpha) * sn(n, order, r))


def de_operator_estimate(
    n: int,
    order: FractionalOrder,
    r: float = DEFAULT_R,
) -> ErrorEstimate:
    """
    Operator-norm DE estimate K_bar_alpha exp(-3.3 sqrt(alpha) s_n).

    Examples:
        >>> est = de_operator_estimate(40, FractionalOrder(0.5))
        >>> 1e-10 < est.value < 2e-10
        True
    """
    value = k_bar_alpha(order) * math.exp(-3.3 * math.sqrt(order.alpha) * sn(n, order, r))
    return ErrorEstimate(
        value,
        EstimateKind.DE_OPERATOR,
        {"alpha": order.alpha, "n": n, "r": r},
    )


def estimate_for(
    kind: str,
    order: FractionalOrder,
    n: int,
    *,
    d: Optional[float] = None,
    lam: Optional[float] = None,
    tau: Optional[float] = None,
    r: float = DEFAULT_R,
) -> ErrorEstimate:
    """
    Dispatch by the short names used on the command line: se, ere, ere2, fest.

    Raises:
        ParameterDomainError: On an unknown kind or a missing lambda/tau
    """
    if kind == "se":
        return se_bound(order, n, HALF_PI if d is None else d)
    if kind == "fest":
        return de_operator_estimate(n, order, r)
    if kind in ("ere", "ere2"):
        if lam is None or tau is None:
            raise ParameterDomainError(f"{kind} needs lambda and tau", field="lambda")
        if kind == "ere":
            return de_estimate_scalar(lam, tau, n, order, r)
        return de_estimate_okayama(lam, tau, n, order, r)
    raise ParameterDomainError(f"unknown estimate kind '{kind}'", field="kind", value=kind)
