"""
Exception hierarchy for the fracpow package.

Provides structured error handling with specific exception types for
different failure scenarios. Every error carries the process exit code the
command-line driver returns for it.
"""

from __future__ import annotations

from typing import Any, Optional


class FracpowError(Exception):
    """Base exception for all package-specific errors."""

    def __init__(
        self,
        message: str,
        *,
        exit_code: int = 1,
        details: Optional[dict[str, Any]] = None,
    ) -> None:
        """
        Initialize package error.

        Args:
            message: Human-readable error message
            exit_code: Process exit code used by the CLI
            details: Optional additional error details
        """
        super().__init__(message)
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}


class ParameterDomainError(FracpowError):
    """Raised when a numerical parameter lies outside its admissible domain."""

    def __init__(
        self,
        message: str,
        *,
        field: Optional[str] = None,
        value: Any = None,
        **kwargs: Any,
    ) -> None:
        """
        Initialize parameter-domain error.

        Args:
            message: Description of the violated domain
            field: Parameter name that failed validation
            value: Offending value
            **kwargs: Additional arguments passed to parent
        """
        kwargs.setdefault("exit_code", 2)
        super().__init__(message, **kwargs)
        self.field = field
        if field:
            self.details["field"] = field
        if value is not None:
            self.details["value"] = value


class PreconditionError(ParameterDomainError):
    """Raised when an operation precondition is not met.

    Typical cases are the DE step admissibility threshold and a spectrum
    certificate below 1.
    """

    def __init__(
        self,
        message: str,
        *,
        hint: Optional[str] = None,
        **kwargs: Any,
    ) -> None:
        super().__init__(message, **kwargs)
        if hint:
            self.details["hint"] = hint


class ConfigurationError(FracpowError):
    """Raised when runtime configuration is invalid or missing."""

    def __init__(self, message: str, **kwargs: Any) -> None:
        kwargs.setdefault("exit_code", 2)
        super().__init__(message, **kwargs)


class InputFileError(FracpowError):
    """Raised when matrix, vector, config or output files cannot be used."""

    def __init__(
        self,
        message: str,
        *,
        path: Optional[str] = None,
        **kwargs: Any,
    ) -> None:
        """
        Initialize I/O error.

        Args:
            message: Error description
            path: File path involved in the failure
            **kwargs: Additional arguments passed to parent
        """
        kwargs.setdefault("exit_code", 3)
        super().__init__(message, **kwargs)
        if path:
            self.details["path"] = str(path)


class SolveError(FracpowError):
    """Raised when a shifted solve breaks down (factorization or CG)."""

    def __init__(
        self,
        message: str,
        *,
        shift: Optional[float] = None,
        iterations: Optional[int] = None,
        **kwargs: Any,
    ) -> None:
        """
        Initialize solve error.

        Args:
            message: Error description
            shift: Shift s of the failing (sI + L) solve
            iterations: Iterations performed before the failure (iterative backends)
            **kwargs: Additional arguments passed to parent
        """
        kwargs.setdefault("exit_code", 4)
        super().__init__(message, **kwargs)
        self.shift = shift
        if shift is not None:
            self.details["shift"] = shift
        if iterations is not None:
            self.details["iterations"] = iterations


class NonSymmetricMatrixError(FracpowError):
    """Raised when an operator matrix fails the symmetry check on load."""

    def __init__(
        self,
        message: str,
        *,
        asymmetry: Optional[float] = None,
        **kwargs: Any,
    ) -> None:
        kwargs.setdefault("exit_code", 5)
        super().__init__(message, **kwargs)
        if asymmetry is not None:
            self.details["relative_asymmetry"] = asymmetry


class DimensionMismatchError(FracpowError):
    """Raised when a vector does not match the operator dimension."""

    def __init__(
        self,
        message: str,
        *,
        expected: Optional[int] = None,
        actual: Optional[int] = None,
        **kwargs: Any,
    ) -> None:
        kwargs.setdefault("exit_code", 6)
        super().__init__(message, **kwargs)
        if expected is not None:
            self.details["expected"] = expected
        if actual is not None:
            self.details["actual"] = actual


class OracleError(FracpowError):
    """Raised when the dense eigendecomposition oracle fails."""

    def __init__(self, message: str, **kwargs: Any) -> None:
        kwargs.setdefault("exit_code", 7)
        super().__init__(message, **kwargs)
