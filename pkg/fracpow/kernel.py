"""
Trapezoidal quadrature rules for fractional powers.

Both transforms discretize the integral representation

    lambda^{-alpha} = (2 sin(alpha pi) / pi) * integral_R g(x) dx

with the trapezoidal rule on the nodes x = l*h, l = -M..N. Each node is
stored in partial-fraction form c_l / (s_l + lambda), so that the same rule
applied to an operator becomes a sum of shifted solves c_l (s_l I + L)^{-1}.

Weights and shifts are generated in log space. Terms whose weight underflows
are kept with weight 0 (the inversion count stays M + N + 1) and skipped
when the rule is applied.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Union

import numpy as np
import numpy.typing as npt

from .exceptions import ParameterDomainError
from .validators import (
    validate_alpha,
    validate_at_least,
    validate_half_open_interval,
    validate_integer,
    validate_positive,
    validate_real,
    validate_spectral_point,
)

logger = logging.getLogger(__name__)

ArrayLike = Union[float, npt.ArrayLike]

HALF_PI = 0.5 * math.pi
LOG_HALF_PI = math.log(HALF_PI)

# ln of the smallest positive normal double; weights below vanish.
LOG_WEIGHT_FLOOR = math.log(np.finfo(float).tiny)

# Shift window. Outside it c/(s + lambda) is rewritten to an equivalent term.
LOG_SHIFT_CEILING = 600.0
LOG_SHIFT_FLOOR = -600.0


class Transform(str, Enum):
    """Variable substitution used to build a rule."""

    SE = "se"
    DE = "de"


@dataclass(frozen=True)
class FractionalOrder:
    """
    The exponent alpha of L^{-alpha} with its derived constants.

    Attributes:
        alpha: Exponent in (0, 1)
        mu: min(alpha, 1 - alpha)
        nu: max(alpha, 1 - alpha)
    """

    alpha: float
    mu: float = field(init=False)
    nu: float = field(init=False)

    def __post_init__(self) -> None:
        alpha = validate_alpha(self.alpha)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "mu", min(alpha, 1.0 - alpha))
        object.__setattr__(self, "nu", max(alpha, 1.0 - alpha))

    @property
    def spread(self) -> float:
        """alpha * (1 - alpha)."""
        return self.alpha * (1.0 - self.alpha)

    @property
    def prefactor(self) -> float:
        """2 sin(alpha pi) / pi, the constant in front of the integral."""
        return 2.0 * math.sin(self.alpha * math.pi) / math.pi

    def complement(self) -> FractionalOrder:
        return FractionalOrder(1.0 - self.alpha)


@dataclass(frozen=True)
class ResolventTerm:
    """
    One quadrature node in the form c * (s + lambda)^{-1}.

    Attributes:
        log_weight: ln c, -inf when the term vanished
        weight: c = exp(log_weight), 0 on underflow
        shift: s > 0
        log_shift: ln s
    """

    log_weight: float
    weight: float
    shift: float
    log_shift: float

    @property
    def vanished(self) -> bool:
        return self.weight == 0.0

    def value_at(self, lam: float) -> float:
        """Contribution c / (s + lam) of this node."""
        if self.vanished:
            return 0.0
        return self.weight / (self.shift + lam)


@dataclass(frozen=True)
class QuadratureRule:
    """
    Ordered partial-fraction expansion of a truncated trapezoidal rule.

    Attributes:
        order: Fractional order the rule approximates
        transform: SE or DE substitution
        h: Step size
        M: Left truncation index (nodes start at l = -M)
        N: Right truncation index (nodes end at l = N)
        tau: DE scaling parameter, 1 for SE
        d: Strip half-width used to choose the parameters
        terms: Nodes in ascending l
    """

    order: FractionalOrder
    transform: Transform
    h: float
    M: int
    N: int
    tau: float
    d: float
    terms: tuple[ResolventTerm, ...]

    def __post_init__(self) -> None:
        if len(self.terms) != self.M + self.N + 1:
            raise ParameterDomainError(
                "rule must hold exactly M + N + 1 terms",
                field="terms",
                value=len(self.terms),
            )

    @property
    def n(self) -> int:
        """Number of inversions M + N + 1."""
        return self.M + self.N + 1

    @property
    def indices(self) -> range:
        return range(-self.M, self.N + 1)

    @cached_property
    def weights(self) -> np.ndarray:
        return _frozen_array(term.weight for term in self.terms)

    @cached_property
    def shifts(self) -> np.ndarray:
        return _frozen_array(term.shift for term in self.terms)

    @cached_property
    def log_weights(self) -> np.ndarray:
        return _frozen_array(term.log_weight for term in self.terms)

    @cached_property
    def active(self) -> np.ndarray:
        """Positions (0-based) of the non-vanished terms, ascending."""
        index = np.flatnonzero(self.weights > 0.0)
        index.flags.writeable = False
        return index

    @property
    def active_count(self) -> int:
        return int(self.active.size)

    def describe(self) -> dict[str, float | int | str]:
        """Provenance record used in logs and CSV headers."""
        return {
            "transform": self.transform.value,
            "alpha": self.order.alpha,
            "h": self.h,
            "M": self.M,
            "N": self.N,
            "n": self.n,
            "tau": self.tau,
            "d": self.d,
            "active": self.active_count,
        }


def _frozen_array(values: Iterable[float]) -> np.ndarray:
    array = np.fromiter(values, dtype=float)
    array.flags.writeable = False
    return array


def _as_result(values: np.ndarray, scalar: bool) -> ArrayLike:
    return float(values) if scalar else values


def log_cosh(x: ArrayLike) -> np.ndarray:
    """ln cosh(x), finite for every finite x."""
    ax = np.abs(np.asarray(x, dtype=float))
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


def compensated_sum(parts: Iterable[np.ndarray]) -> np.ndarray:
    """
    Neumaier-compensated sum of arrays, accumulated in iteration order.

    The same inputs in the same order always give bit-identical output.
    """
    total: np.ndarray | None = None
    compensation: np.ndarray | None = None
    for part in parts:
        part = np.asarray(part, dtype=float)
        if total is None:
            total = part.copy()
            compensation = np.zeros_like(total)
            continue
        running = total + part
        compensation += np.where(
            np.abs(total) >= np.abs(part),
            (total - running) + part,
            (part - running) + total,
        )
        total = running

    if total is None:
        raise ParameterDomainError("compensated_sum needs at least one part")
    return total + compensation


# =============================================================================
# Integrands
# =============================================================================


def se_integrand(lam: float, order: FractionalOrder, x: ArrayLike) -> ArrayLike:
    """
    SE integrand e^{2 alpha x} / (1 + e^{2x} lambda).

    For x > 0 the divided form e^{-2(1-alpha)x} / (e^{-2x} + lambda) is used,
    so no intermediate overflows for |x| up to 700.
    """
    lam = validate_at_least(lam, 1.0, "lambda")
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    alpha = order.alpha

    out = np.empty_like(x)
    right = x > 0
    left = ~right
    xr = x[right]
    xl = x[left]
    out[right] = np.exp(-2.0 * (1.0 - alpha) * xr) / (np.exp(-2.0 * xr) + lam)
    out[left] = np.exp(2.0 * alpha * xl) / (1.0 + np.exp(2.0 * xl) * lam)
    return _as_result(out, scalar)


def de_integrand(
    lam: float,
    order: FractionalOrder,
    tau: float,
    x: ArrayLike,
) -> ArrayLike:
    """
    DE integrand (pi/2) tau^{1-alpha} exp(alpha pi sinh x) cosh x / (tau + lambda exp(pi sinh x)).

    Evaluated in log space; for x > 0 the numerator and denominator are
    divided by exp(pi sinh x) first.
    """
    lam = validate_at_least(lam, 1.0, "lambda")
    tau = validate_at_least(tau, 1.0, "tau")
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    alpha = order.alpha
    log_tau = math.log(tau)
    log_lam = math.log(lam)

    with np.errstate(over="ignore"):
        sh = math.pi * np.sinh(x)
    base = LOG_HALF_PI + (1.0 - alpha) * log_tau + log_cosh(x)

    log_g = np.empty_like(x)
    right = x > 0
    left = ~right
    sr = sh[right]
    sl = sh[left]
    with np.errstate(invalid="ignore"):
        log_g[right] = (
            base[right]
            - (1.0 - alpha) * sr
            - np.logaddexp(log_tau - sr, log_lam)
        )
        log_g[left] = (
            base[left]
            + alpha * sl
            - np.logaddexp(log_tau, log_lam + sl)
        )
    return _as_result(np.exp(log_g), scalar)


# =============================================================================
# Rule construction
# =============================================================================


def _normalized_terms(
    log_weight: np.ndarray,
    log_ratio: np.ndarray,
    log_shift: np.ndarray,
) -> tuple[ResolventTerm, ...]:
    """
    Turn log-space (c, c/s, s) triples into finite ResolventTerms.

    Shifts above e^{600} are replaced by s' = e^{600} with c' = (c/s) s', which
    leaves c/(s + lambda) unchanged in double precision for lambda <= 1e100.
    Shifts below e^{-600} are floored (lambda >= 1 dominates them).
    """
    with np.errstate(invalid="ignore"):
        far = log_shift > LOG_SHIFT_CEILING
        eff_shift = np.where(far, LOG_SHIFT_CEILING, np.maximum(log_shift, LOG_SHIFT_FLOOR))
        eff_weight = np.where(far, log_ratio + LOG_SHIFT_CEILING, log_weight)
        vanished = ~(eff_weight >= LOG_WEIGHT_FLOOR)

    eff_weight = np.where(vanished, -np.inf, eff_weight)
    weights = np.where(vanished, 0.0, np.exp(np.where(vanished, 0.0, eff_weight)))
    shifts = np.exp(eff_shift)

    if np.any(far):
        logger.debug("Renormalized %d far-shift terms", int(np.count_nonzero(far)))

    return tuple(
        ResolventTerm(
            log_weight=float(lw),
            weight=float(w),
            shift=float(s),
            log_shift=float(ls),
        )
        for lw, w, s, ls in zip(eff_weight, weights, shifts, eff_shift)
    )


def build_se_rule(
    order: FractionalOrder,
    h: float,
    M: int,
    N: int,
    *,
    d: float = HALF_PI,
) -> QuadratureRule:
    """
    Build the SE rule as a partial-fraction expansion.

    Term l: c_l = (2 sin(alpha pi)/pi) h e^{-2(1-alpha) l h}, s_l = e^{-2 l h}.

    Args:
        order: Fractional order
        h: Step size (> 0)
        M: Left truncation index (>= 0)
        N: Right truncation index (>= 0)
        d: Strip half-width the parameters were chosen for (provenance)

    Returns:
        Rule with M + N + 1 terms, shifts strictly decreasing in l

    Raises:
        ParameterDomainError: If h <= 0, M or N negative, or d outside (0, pi/2]
    """
    h = validate_positive(h, "h")
    M = validate_integer(M, field_name="M")
    N = validate_integer(N, field_name="N")
    d = validate_half_open_interval(d, 0.0, HALF_PI, "d")
    alpha = order.alpha

    x = np.arange(-M, N + 1, dtype=float) * h
    log_scale = math.log(order.prefactor * h)
    log_weight = log_scale - 2.0 * (1.0 - alpha) * x
    log_ratio = log_scale + 2.0 * alpha * x
    log_shift = -2.0 * x

    rule = QuadratureRule(
        order=order,
        transform=Transform.SE,
        h=h,
        M=M,
        N=N,
        tau=1.0,
        d=d,
        terms=_normalized_terms(log_weight, log_ratio, log_shift),
    )
    logger.debug("Built SE rule %s", rule.describe())
    return rule


def build_de_rule(
    order: FractionalOrder,
    tau: float,
    h: float,
    n: int,
    *,
    d: float = HALF_PI,
) -> QuadratureRule:
    """
    Build the DE rule with M = N = n.

    Term l (x = l h):
        c_l = sin(alpha pi) h tau^{1-alpha} cosh(x) e^{-(1-alpha) pi sinh x}
        s_l = tau e^{-pi sinh x}

    Args:
        order: Fractional order
        tau: Scaling parameter (>= 1)
        h: Step size (> 0)
        n: Truncation index, M = N = n
        d: Strip half-width the step was derived from (provenance)

    Raises:
        ParameterDomainError: If tau < 1, h <= 0 or n negative
    """
    tau = validate_at_least(tau, 1.0, "tau")
    h = validate_positive(h, "h")
    n = validate_integer(n, field_name="n")
    d = validate_half_open_interval(d, 0.0, HALF_PI, "d")
    alpha = order.alpha
    log_tau = math.log(tau)

    x = np.arange(-n, n + 1, dtype=float) * h
    with np.errstate(over="ignore"):
        sh = math.pi * np.sinh(x)
    log_scale = math.log(math.sin(alpha * math.pi) * h) + log_cosh(x)

    with np.errstate(invalid="ignore"):
        log_weight = log_scale + (1.0 - alpha) * log_tau - (1.0 - alpha) * sh
        log_ratio = log_scale - alpha * log_tau + alpha * sh
        log_shift = log_tau - sh

    rule = QuadratureRule(
        order=order,
        transform=Transform.DE,
        h=h,
        M=n,
        N=n,
        tau=tau,
        d=d,
        terms=_normalized_terms(log_weight, log_ratio, log_shift),
    )
    logger.debug("Built DE rule %s", rule.describe())
    return rule


# =============================================================================
# Evaluation
# =============================================================================


def eval_rule_many(rule: QuadratureRule, lams: npt.ArrayLike) -> np.ndarray:
    """
    Evaluate sum_l c_l / (s_l + lambda) for every lambda in lams.

    Terms are accumulated in ascending l with compensated summation;
    vanished terms are skipped.

    Raises:
        ParameterDomainError: If any lambda < 1
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    if not np.all(np.isfinite(lams)) or np.any(lams < 1.0):
        bad = lams[~(np.isfinite(lams) & (lams >= 1.0))]
        validate_spectral_point(float(bad[0]))

    weights = rule.weights
    shifts = rule.shifts
    if rule.active_count == 0:
        return np.zeros_like(lams)
    return compensated_sum(weights[k] / (shifts[k] + lams) for k in rule.active)


def eval_rule(rule: QuadratureRule, lam: float) -> float:
    """
    Evaluate the rule at a scalar lambda >= 1.

    Examples:
        >>> rule = build_se_rule(FractionalOrder(0.5), 1.0, 0, 0)
        >>> round(eval_rule(rule, 1.0), 12)
        0.318309886184
    """
    lam = validate_spectral_point(lam)
    return float(eval_rule_many(rule, [lam])[0])


def direct_power(lam: ArrayLike, order: FractionalOrder) -> ArrayLike:
    """Reference value lambda^{-alpha}."""
    if np.ndim(lam) == 0:
        return validate_real(lam, "lambda") ** (-order.alpha)
    return np.power(np.asarray(lam, dtype=float), -order.alpha)
