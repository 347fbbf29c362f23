"""
Tuning parameters for the SE and DE rules.

SE: step/truncation balancing from a step h or a target node count.
DE: the complex pole of the transformed integrand, strip half-widths, the
step rule, the growth constant s_n and the scaling parameters tau* and lambda*.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import ParameterDomainError, PreconditionError
from .kernel import (
    HALF_PI,
    FractionalOrder,
    QuadratureRule,
    build_de_rule,
    build_se_rule,
)
from .validators import (
    validate_at_least,
    validate_half_open_interval,
    validate_integer,
    validate_open_interval,
    validate_positive,
)

logger = logging.getLogger(__name__)

DEFAULT_R = 0.95

# Coefficient of tau* = exp(k s_n / sqrt(alpha)).
TAU_COEFFICIENT = 0.3
TAU_COEFFICIENT_EXACT = (-3.0 + math.sqrt(13.0)) / 2.0

_SNAP_RTOL = 1e-9


def _snapped_ceil(value: float) -> int:
    """Ceiling that ignores rounding noise around integers."""
    nearest = round(value)
    if abs(value - nearest) <= _SNAP_RTOL * max(1.0, abs(value)):
        return int(nearest)
    return math.ceil(value)


# =============================================================================
# SE parameters
# =============================================================================


@dataclass(frozen=True)
class SEParams:
    """
    Balanced SE parameters.

    Attributes:
        order: Fractional order
        d: Strip half-width in (0, pi/2]
        h: Step size
        M: Left truncation index, ceil(pi d / (alpha h^2))
        N: Right truncation index, ceil(pi d / ((1 - alpha) h^2))
    """

    order: FractionalOrder
    d: float
    h: float
    M: int
    N: int

    @property
    def n(self) -> int:
        return self.M + self.N + 1

    def build_rule(self) -> QuadratureRule:
        return build_se_rule(self.order, self.h, self.M, self.N, d=self.d)


def se_params_from_h(order: FractionalOrder, h: float, d: float = HALF_PI) -> SEParams:
    """
    Balance truncation against discretization for a given step.

    Examples:
        >>> p = se_params_from_h(FractionalOrder(0.25), 1.0)
        >>> (p.M, p.N, p.n)
        (20, 7, 28)

    Raises:
        ParameterDomainError: If h <= 0 or d outside (0, pi/2]
    """
    h = validate_positive(h, "h")
    d = validate_half_open_interval(d, 0.0, HALF_PI, "d")
    base = math.pi * d / (h * h)
    return SEParams(
        order=order,
        d=d,
        h=h,
        M=_snapped_ceil(base / order.alpha),
        N=_snapped_ceil(base / (1.0 - order.alpha)),
    )


def se_params_from_n(order: FractionalOrder, n_target: int, d: float = HALF_PI) -> SEParams:
    """
    SE parameters for roughly n_target inversions.

    h = sqrt(pi d / (n_target alpha (1 - alpha))); the reported n includes
    the ceiling slack and may exceed n_target.
    """
    n_target = validate_integer(n_target, min_value=3, field_name="n_target")
    d = validate_half_open_interval(d, 0.0, HALF_PI, "d")
    h = math.sqrt(math.pi * d / (n_target * order.spread))
    return se_params_from_h(order, h, d)


# =============================================================================
# Poles and strip widths
# =============================================================================


@dataclass(frozen=True)
class PoleLocation:
    """Pole of the DE integrand closest to the real axis."""

    x0: complex
    im_x0: float


def _asinh_right_half(u: float) -> complex:
    """asinh(u + i) for u >= 0; w^2 + 1 is formed as u^2 + 2iu."""
    w = complex(u, 1.0)
    return cmath.log(w + cmath.sqrt(complex(u * u, 2.0 * u)))


def pole_x0(lam: float, tau: float) -> PoleLocation:
    """
    Solve sinh(x0) = ln(tau / lambda) / pi + i on the principal branch.

    For Re(w) < 0 the reflection asinh(w) = -asinh(-w) is used.

    Raises:
        ParameterDomainError: If lambda < 1 or tau < 1
    """
    lam = validate_at_least(lam, 1.0, "lambda")
    tau = validate_at_least(tau, 1.0, "tau")
    u = (math.log(tau) - math.log(lam)) / math.pi

    if u >= 0.0:
        x0 = _asinh_right_half(u)
    else:
        x0 = -_asinh_right_half(-u).conjugate()
    return PoleLocation(x0=x0, im_x0=x0.imag)


def im_x0_large_lambda(lam: float, tau: float) -> float:
    """Asymptotic Im x0 = pi / ln(lambda / tau) for lambda >> tau."""
    lam = validate_at_least(lam, 1.0, "lambda")
    tau = validate_at_least(tau, 1.0, "tau")
    if lam <= tau:
        raise ParameterDomainError(
            "lambda must exceed tau",
            field="lambda",
            value=lam,
        )
    return math.pi / (math.log(lam) - math.log(tau))


def im_x0_large_tau(tau: float) -> float:
    """Asymptotic Im x0 = pi / ln(tau) at lambda = 1, tau >> 1."""
    tau = validate_at_least(tau, 1.0, "tau")
    if tau <= 1.0:
        raise ParameterDomainError("tau must exceed 1", field="tau", value=tau)
    return math.pi / math.log(tau)


def strip_halfwidth(lam: float, tau: float, r: float = DEFAULT_R) -> float:
    """d = r Im x0(lambda, tau), using the exact pole."""
    r = validate_open_interval(r, 0.0, 1.0, "r")
    return r * pole_x0(lam, tau).im_x0


# =============================================================================
# DE step and scaling
# =============================================================================


def de_step_threshold(d: float, order: FractionalOrder) -> float:
    """Smallest admissible n (real-valued): mu e / (4 d)."""
    d = validate_open_interval(d, 0.0, HALF_PI, "d")
    return order.mu * math.e / (4.0 * d)


def de_step(n: int, d: float, order: FractionalOrder) -> float:
    """
    DE step h = ln(4 d n / mu) / n.

    Raises:
        PreconditionError: If n < mu e / (4 d); the message names the
            minimum admissible n
    """
    n = validate_integer(n, min_value=1, field_name="n")
    threshold = de_step_threshold(d, order)
    if n < threshold:
        minimum = math.ceil(threshold)
        raise PreconditionError(
            f"n={n} is below the DE step threshold for d={d:.6g}; "
            f"the minimum admissible n is {minimum}",
            field="n",
            value=n,
            hint=f"use n >= {minimum} or a wider strip",
        )
    return math.log(4.0 * d * n / order.mu) / n


def de_constants(order: FractionalOrder, r: float = DEFAULT_R) -> tuple[float, float]:
    """(c1, c2) = (2 pi^2 r, 4 pi r / mu)."""
    r = validate_open_interval(r, 0.0, 1.0, "r")
    return 2.0 * math.pi**2 * r, 4.0 * math.pi * r / order.mu


def sn(n: int, order: FractionalOrder, r: float = DEFAULT_R) -> float:
    """
    s_n = sqrt(c1 n / ln(c2 n)).

    Raises:
        ParameterDomainError: If c2 n <= 1
    """
    n = validate_integer(n, min_value=1, field_name="n")
    c1, c2 = de_constants(order, r)
    if c2 * n <= 1.0:
        raise ParameterDomainError(
            f"c2*n must exceed 1 (c2={c2:.6g}, n={n})",
            field="n",
            value=n,
        )
    return math.sqrt(c1 * n / math.log(c2 * n))


def tau_star(
    n: int,
    order: FractionalOrder,
    r: float = DEFAULT_R,
    *,
    exact_root: bool = False,
) -> float:
    """
    Closed-form scaling tau* = exp(k s_n / sqrt(alpha)), k = 0.3.

    With exact_root the unrounded k = (-3 + sqrt(13)) / 2 is used.

    Raises:
        ParameterDomainError: If tau* overflows
    """
    coefficient = TAU_COEFFICIENT_EXACT if exact_root else TAU_COEFFICIENT
    exponent = coefficient * sn(n, order, r) / math.sqrt(order.alpha)
    try:
        return math.exp(exponent)
    except OverflowError as exc:
        raise ParameterDomainError(
            "tau* overflows for this (n, alpha)",
            field="alpha",
            value=order.alpha,
        ) from exc


def lambda_star(
    n: int,
    order: FractionalOrder,
    tau: float,
    r: float = DEFAULT_R,
) -> float:
    """
    Approximate location of the interior error peak, tau exp(s_n / sqrt(alpha)).

    Returns inf when the value exceeds the float range.
    """
    tau = validate_at_least(tau, 1.0, "tau")
    log_value = math.log(tau) + sn(n, order, r) / math.sqrt(order.alpha)
    if log_value > math.log(np.finfo(float).max):
        logger.warning("lambda* exceeds the float range (ln lambda* = %.1f)", log_value)
        return math.inf
    return math.exp(log_value)


def lambda_star_admissible(n: int, order: FractionalOrder) -> bool:
    """n >= 1 / (9 alpha): the DE step condition then holds at lambda*."""
    n = validate_integer(n, min_value=1, field_name="n")
    return n >= 1.0 / (9.0 * order.alpha)


@dataclass(frozen=True)
class DEConfig:
    """
    DE tuning bundle.

    Attributes:
        order: Fractional order
        n: M = N = n
        r: Strip safety factor
        c1: 2 pi^2 r
        c2: 4 pi r / mu
        s_n: sqrt(c1 n / ln(c2 n))
        tau: Scaling parameter in use (tau* unless overridden)
        d: Strip half-width used for the step
        h: Step size
    """

    order: FractionalOrder
    n: int
    r: float
    c1: float
    c2: float
    s_n: float
    tau: float
    d: float
    h: float

    def build_rule(self) -> QuadratureRule:
        return build_de_rule(self.order, self.tau, self.h, self.n, d=self.d)

    @property
    def lambda_star(self) -> float:
        return lambda_star(self.n, self.order, self.tau, self.r)


def de_config(
    n: int,
    order: FractionalOrder,
    r: float = DEFAULT_R,
    *,
    tau: Optional[float] = None,
    d: Optional[float] = None,
    exact_root: bool = False,
) -> DEConfig:
    """
    Assemble the DE parameters: tau*, then d at lambda = 1, then h.

    Args:
        n: Truncation index
        order: Fractional order
        r: Strip safety factor in (0, 1)
        tau: Override for tau*
        d: Override for the strip half-width
        exact_root: Use the unrounded tau* coefficient

    Raises:
        PreconditionError: If n is below the step threshold for the chosen d
    """
    n = validate_integer(n, min_value=1, field_name="n")
    c1, c2 = de_constants(order, r)
    s_n = sn(n, order, r)

    if tau is None:
        tau = tau_star(n, order, r, exact_root=exact_root)
    else:
        tau = validate_at_least(tau, 1.0, "tau")

    if d is None:
        d = strip_halfwidth(1.0, tau, r)
    else:
        d = validate_open_interval(d, 0.0, HALF_PI, "d")

    config = DEConfig(
        order=order,
        n=n,
        r=r,
        c1=c1,
        c2=c2,
        s_n=s_n,
        tau=tau,
        d=d,
        h=de_step(n, d, order),
    )
    logger.debug(
        "DE config n=%d alpha=%.6g tau=%.6g d=%.6g h=%.6g",
        n,
        order.alpha,
        config.tau,
        config.d,
        config.h,
    )
    return config


def equalized_tau(
    n: int,
    order: FractionalOrder,
    r: float = DEFAULT_R,
    *,
    lambda_max: float = 1e40,
    grid_points: int = 400,
) -> float:
    """
    Solve phi(1, tau) = max_lambda phi(lambda, tau) numerically for tau.

    The maximum is taken on a log grid over [tau, lambda_max]; the root is
    bracketed in ln(tau) and refined with brentq. Starts from tau*.

    Raises:
        ParameterDomainError: If no sign change is found
    """
    from scipy.optimize import brentq

    from .estimates import de_phi_peak, de_phi  # local import to avoid cycle

    def gap(log_tau: float) -> float:
        tau = math.exp(log_tau)
        at_one = de_phi(1.0, tau, n, order, r)
        peak = de_phi_peak(tau, n, order, r, lambda_max=lambda_max, grid_points=grid_points)
        return math.log(at_one) - math.log(peak)

    start = math.log(tau_star(n, order, r))
    low, high = start, start
    step = max(1.0, 0.5 * start)
    for _ in range(60):
        if gap(low) < 0.0:
            break
        low = max(low - step, 1e-6)
    for _ in range(60):
        if gap(high) > 0.0:
            break
        high += step

    if not (gap(low) < 0.0 < gap(high)):
        raise ParameterDomainError(
            "could not bracket the equalized tau",
            field="n",
            value=n,
        )

    log_tau = brentq(gap, low, high, xtol=1e-10, rtol=1e-12)
    logger.debug("Equalized tau for n=%d alpha=%.6g: %.6g", n, order.alpha, math.exp(log_tau))
    return math.exp(log_tau)
