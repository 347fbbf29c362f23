"""
Input validation utilities for fracpow.

Centralized checks for the numerical parameters shared by the quadrature,
parameter-selection and estimate modules.

Design Principles:
- Fail-fast validation with descriptive errors
- Every failure names the offending field
- Validators return the (coerced) value so they compose in assignments
"""

from __future__ import annotations

import math
from typing import Optional

from .exceptions import ParameterDomainError

# Smallest spectral point admitted by the quadrature rules.
SPECTRUM_FLOOR = 1.0

SCALING_HINT = (
    "rules are built for spectra in [1, inf); pre-scale the operator "
    "(scaled_fracpow) or the scalar argument"
)


def validate_real(value: float, field_name: str = "value") -> float:
    """
    Coerce to float and reject NaN/inf.

    Raises:
        ParameterDomainError: If value is not a finite real number
    """
    try:
        number = float(value)
    except (TypeError, ValueError) as exc:
        raise ParameterDomainError(
            f"{field_name} must be a real number",
            field=field_name,
            value=value,
        ) from exc

    if not math.isfinite(number):
        raise ParameterDomainError(
            f"{field_name} must be finite",
            field=field_name,
            value=number,
        )

    return number


def validate_alpha(alpha: float, field_name: str = "alpha") -> float:
    """
    Validate a fractional exponent.

    Args:
        alpha: Exponent to validate
        field_name: Field name for error messages

    Returns:
        Validated exponent as float

    Raises:
        ParameterDomainError: If alpha is not in the open interval (0, 1)

    Examples:
        >>> validate_alpha(0.5)
        0.5
        >>> validate_alpha(1.0)
        Traceback (most recent call last):
        ...
        ParameterDomainError: alpha must lie in (0, 1)
    """
    return validate_open_interval(alpha, 0.0, 1.0, field_name)


def validate_positive(value: float, field_name: str = "value") -> float:
    """
    Validate a strictly positive real.

    Raises:
        ParameterDomainError: If value <= 0
    """
    number = validate_real(value, field_name)
    if number <= 0.0:
        raise ParameterDomainError(
            f"{field_name} must be positive",
            field=field_name,
            value=number,
        )
    return number


def validate_open_interval(
    value: float,
    lower: float,
    upper: float,
    field_name: str = "value",
) -> float:
    """
    Validate lower < value < upper.

    Raises:
        ParameterDomainError: If value lies outside the open interval
    """
    number = validate_real(value, field_name)
    if not (lower < number < upper):
        raise ParameterDomainError(
            f"{field_name} must lie in ({lower:g}, {upper:g})",
            field=field_name,
            value=number,
        )
    return number


def validate_half_open_interval(
    value: float,
    lower: float,
    upper: float,
    field_name: str = "value",
) -> float:
    """
    Validate lower < value <= upper.

    Raises:
        ParameterDomainError: If value lies outside (lower, upper]
    """
    number = validate_real(value, field_name)
    if not (lower < number <= upper):
        raise ParameterDomainError(
            f"{field_name} must lie in ({lower:g}, {upper:g}]",
            field=field_name,
            value=number,
        )
    return number


def validate_at_least(value: float, minimum: float, field_name: str = "value") -> float:
    """
    Validate value >= minimum.

    Raises:
        ParameterDomainError: If value < minimum
    """
    number = validate_real(value, field_name)
    if number < minimum:
        raise ParameterDomainError(
            f"{field_name} must be at least {minimum:g}",
            field=field_name,
            value=number,
        )
    return number


def validate_integer(
    value: int,
    *,
    min_value: int = 0,
    max_value: Optional[int] = None,
    field_name: str = "value",
) -> int:
    """
    Validate an integer count (node counts, truncation indices).

    Args:
        value: Integer to validate
        min_value: Minimum allowed value
        max_value: Optional maximum allowed value
        field_name: Field name for error messages

    Returns:
        Validated integer

    Raises:
        ParameterDomainError: If value is not integral or out of range
    """
    if isinstance(value, bool):
        raise ParameterDomainError(
            f"{field_name} must be an integer",
            field=field_name,
            value=value,
        )
    try:
        integer = int(value)
    except (TypeError, ValueError) as exc:
        raise ParameterDomainError(
            f"{field_name} must be an integer",
            field=field_name,
            value=value,
        ) from exc

    if integer != value:
        raise ParameterDomainError(
            f"{field_name} must be an integer",
            field=field_name,
            value=value,
        )

    if integer < min_value:
        raise ParameterDomainError(
            f"{field_name} must be at least {min_value}",
            field=field_name,
            value=integer,
        )

    if max_value is not None and integer > max_value:
        raise ParameterDomainError(
            f"{field_name} cannot exceed {max_value}",
            field=field_name,
            value=integer,
        )

    return integer


def validate_spectral_point(value: float, field_name: str = "lambda") -> float:
    """
    Validate a scalar argument lambda >= 1.

    Raises:
        ParameterDomainError: If lambda < 1, with a hint about pre-scaling
    """
    number = validate_real(value, field_name)
    if number < SPECTRUM_FLOOR:
        raise ParameterDomainError(
            f"{field_name} must be >= 1 ({SCALING_HINT})",
            field=field_name,
            value=number,
        )
    return number
