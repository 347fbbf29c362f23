"""
Application of quadrature rules to symmetric positive definite operators.

L^{-alpha} g is approximated by sum_l c_l (s_l I + L)^{-1} g. Backends
expose the shifted solve; the per-term solves run on a bounded worker pool
and the reduction is compensated and in fixed term order, so results do
not depend on the worker count.
"""

from __future__ import annotations

import logging
import math
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import numpy.typing as npt
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .config import RuntimeSettings
from .exceptions import (
    DimensionMismatchError,
    NonSymmetricMatrixError,
    OracleError,
    ParameterDomainError,
    PreconditionError,
    SolveError,
)
from .kernel import FractionalOrder, QuadratureRule, compensated_sum, eval_rule_many
from .performance import ordered_map, timed_block
from .validators import SCALING_HINT, SPECTRUM_FLOOR, validate_positive

logger = logging.getLogger(__name__)

SYMMETRY_RTOL = 1e-12
ORACLE_MAX_DIM = 2000

# Bounds of the CG tolerance derived from a quadrature estimate.
CG_TOLERANCE_CAP = 1e-12
CG_TOLERANCE_FLOOR = 1e-14

# Relative margin below the certificate in the spectrum check.
CERTIFICATE_MARGIN = 1e-8

SparseMatrix = Union[scipy.sparse.spmatrix, scipy.sparse.sparray]


@dataclass(frozen=True)
class SolveRecord:
    """Statistics of one shifted solve."""

    index: int
    shift: float
    iterations: int
    residual: float


@dataclass(frozen=True)
class FracpowResult:
    """
    Result of apply_fracpow.

    Attributes:
        vector: Approximation of L^{-alpha} g
        terms_applied: Number of non-vanished terms solved for
        solver_stats: One record per applied term, ascending l
    """

    vector: np.ndarray
    terms_applied: int
    solver_stats: tuple[SolveRecord, ...]


# =============================================================================
# Backends
# =============================================================================


class ShiftedSolveOperator(ABC):
    """
    SPD operator exposing (sI + L)^{-1} v.

    spectrum_lower_bound is a caller-supplied certificate that the spectrum
    lies in [bound, inf).
    """

    def __init__(self, dim: int, spectrum_lower_bound: float) -> None:
        self.dim = dim
        self.spectrum_lower_bound = validate_positive(
            spectrum_lower_bound, "spectrum_lower_bound"
        )

    @abstractmethod
    def matvec(self, v: np.ndarray) -> np.ndarray:
        """L v."""

    @abstractmethod
    def solve(self, shift: float, v: np.ndarray) -> np.ndarray:
        """(shift I + L)^{-1} v."""

    @abstractmethod
    def scaled(self, factor: float) -> ShiftedSolveOperator:
        """The operator factor * L with its certificate scaled alike."""

    def prepare(self, shifts: npt.ArrayLike) -> None:
        """Hook to build per-shift state before the parallel phase."""

    def solve_detailed(self, shift: float, v: np.ndarray) -> tuple[np.ndarray, int, float]:
        """Solve and report (solution, iterations, relative residual)."""
        x = self.solve(shift, v)
        return x, 0, self.relative_residual(shift, x, v)

    def relative_residual(self, shift: float, x: np.ndarray, v: np.ndarray) -> float:
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            return 0.0
        return float(np.linalg.norm(v - shift * x - self.matvec(x))) / norm


class DiagonalOperator(ShiftedSolveOperator):
    """Diagonal operator; shifted solves are componentwise divisions."""

    def __init__(
        self,
        eigenvalues: npt.ArrayLike,
        spectrum_lower_bound: Optional[float] = None,
    ) -> None:
        eigenvalues = np.asarray(eigenvalues, dtype=float).ravel()
        if eigenvalues.size == 0 or not np.all(np.isfinite(eigenvalues)) or np.any(eigenvalues <= 0.0):
            raise ParameterDomainError(
                "eigenvalues must be finite and positive",
                field="eigenvalues",
            )
        if spectrum_lower_bound is None:
            spectrum_lower_bound = float(eigenvalues.min())
        super().__init__(eigenvalues.size, spectrum_lower_bound)
        self.eigenvalues = eigenvalues
        self.eigenvalues.flags.writeable = False

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.eigenvalues * v

    def solve(self, shift: float, v: np.ndarray) -> np.ndarray:
        return v / (shift + self.eigenvalues)

    def scaled(self, factor: float) -> DiagonalOperator:
        factor = validate_positive(factor, "factor")
        return DiagonalOperator(self.eigenvalues * factor, self.spectrum_lower_bound * factor)


def _check_symmetric(asymmetry: float, scale: float) -> None:
    if asymmetry > SYMMETRY_RTOL * max(scale, np.finfo(float).tiny):
        relative = asymmetry / scale if scale else math.inf
        raise NonSymmetricMatrixError(
            f"matrix is not symmetric (relative asymmetry {relative:.3e})",
            asymmetry=relative,
        )


class DenseSPDOperator(ShiftedSolveOperator):
    """
    Dense SPD matrix with a Cholesky factorization cached per shift.

    prepare() builds the factorizations before concurrent solves; late
    shifts are factored under a lock.
    """

    def __init__(
        self,
        matrix: npt.ArrayLike,
        spectrum_lower_bound: float = SPECTRUM_FLOOR,
        *,
        check_symmetry: bool = True,
    ) -> None:
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
            raise DimensionMismatchError(
                "operator matrix must be square",
                expected=matrix.shape[0] if matrix.ndim else None,
                actual=matrix.shape[1] if matrix.ndim == 2 else None,
            )
        if check_symmetry:
            _check_symmetric(
                float(np.max(np.abs(matrix - matrix.T))),
                float(np.max(np.abs(matrix))),
            )
        super().__init__(matrix.shape[0], spectrum_lower_bound)
        self.matrix = 0.5 * (matrix + matrix.T)
        self._factors: dict[float, tuple[np.ndarray, bool]] = {}
        self._lock = threading.Lock()

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def _factor(self, shift: float) -> tuple[np.ndarray, bool]:
        shifted = self.matrix + shift * np.eye(self.dim)
        try:
            return scipy.linalg.cho_factor(shifted, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            logger.warning("Cholesky factorization failed for shift %.6g", shift)
            raise SolveError(
                f"Cholesky factorization failed for shift {shift:.6g}: {exc}",
                shift=shift,
            ) from exc

    def prepare(self, shifts: npt.ArrayLike) -> None:
        with self._lock:
            for shift in np.asarray(shifts, dtype=float).ravel():
                key = float(shift)
                if key not in self._factors:
                    self._factors[key] = self._factor(key)

    def solve(self, shift: float, v: np.ndarray) -> np.ndarray:
        key = float(shift)
        factor = self._factors.get(key)
        if factor is None:
            with self._lock:
                factor = self._factors.get(key)
                if factor is None:
                    factor = self._factors[key] = self._factor(key)
        return scipy.linalg.cho_solve(factor, v, check_finite=False)

    def scaled(self, factor: float) -> DenseSPDOperator:
        factor = validate_positive(factor, "factor")
        return DenseSPDOperator(
            self.matrix * factor,
            self.spectrum_lower_bound * factor,
            check_symmetry=False,
        )


class IterativeOperator(ShiftedSolveOperator):
    """Sparse SPD matrix; each shifted system is solved by conjugate gradients."""

    def __init__(
        self,
        matrix: Union[SparseMatrix, npt.ArrayLike],
        spectrum_lower_bound: float = SPECTRUM_FLOOR,
        *,
        cg_tolerance: float = CG_TOLERANCE_CAP,
        cg_max_iterations: Optional[int] = None,
        check_symmetry: bool = True,
    ) -> None:
        matrix = scipy.sparse.csr_matrix(matrix, dtype=float)
        if matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
            raise DimensionMismatchError(
                "operator matrix must be square",
                expected=matrix.shape[0],
                actual=matrix.shape[1],
            )
        if check_symmetry:
            scale = float(abs(matrix).max()) if matrix.nnz else 0.0
            difference = matrix - matrix.T
            asymmetry = float(abs(difference).max()) if difference.nnz else 0.0
            _check_symmetric(asymmetry, scale)
        super().__init__(matrix.shape[0], spectrum_lower_bound)
        self.matrix = matrix
        self.cg_tolerance = validate_positive(cg_tolerance, "cg_tolerance")
        self.cg_max_iterations = cg_max_iterations or 10 * self.dim
        self._identity = scipy.sparse.identity(self.dim, dtype=float, format="csr")

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def solve(self, shift: float, v: np.ndarray) -> np.ndarray:
        return self.solve_detailed(shift, v)[0]

    def solve_detailed(self, shift: float, v: np.ndarray) -> tuple[np.ndarray, int, float]:
        shifted = self.matrix + shift * self._identity
        iterations = 0

        def count(_: np.ndarray) -> None:
            nonlocal iterations
            iterations += 1

        x, info = scipy.sparse.linalg.cg(
            shifted,
            v,
            rtol=self.cg_tolerance,
            atol=0.0,
            maxiter=self.cg_max_iterations,
            callback=count,
        )
        if info != 0:
            logger.warning("CG failed for shift %.6g after %d iterations (info=%d)", shift, iterations, info)
            raise SolveError(
                f"CG did not converge for shift {shift:.6g} (info={info})",
                shift=shift,
                iterations=iterations,
            )
        return x, iterations, self.relative_residual(shift, x, v)

    def scaled(self, factor: float) -> IterativeOperator:
        factor = validate_positive(factor, "factor")
        return IterativeOperator(
            self.matrix * factor,
            self.spectrum_lower_bound * factor,
            cg_tolerance=self.cg_tolerance,
            cg_max_iterations=self.cg_max_iterations,
            check_symmetry=False,
        )


# =============================================================================
# Certificates and solver tolerances
# =============================================================================


def subordinate_cg_tolerance(estimate: float) -> float:
    """
    CG relative tolerance min(1e-12, 0.01 * estimate), floored at 1e-14.

    Args:
        estimate: Quadrature error estimate of the rule being applied; an
            estimate that underflowed to 0 gives the floor
    """
    return max(CG_TOLERANCE_FLOOR, min(CG_TOLERANCE_CAP, 0.01 * estimate))


def _smallest_eigenvalue(matrix: SparseMatrix) -> float:
    try:
        values = scipy.sparse.linalg.eigsh(
            matrix, k=1, which="SA", return_eigenvectors=False, tol=1e-8
        )
    except (scipy.sparse.linalg.ArpackNoConvergence, ValueError) as exc:
        raise PreconditionError(
            "could not estimate the smallest eigenvalue",
            field="spectrum_lower_bound",
            hint="pass --spectrum-lower-bound",
        ) from exc
    return float(values[0])


def verify_spectrum_lower_bound(op: ShiftedSolveOperator) -> None:
    """
    Check that the operator spectrum lies in [op.spectrum_lower_bound, inf).

    Dense matrices (and sparse ones up to ORACLE_MAX_DIM rows) are checked by
    a Cholesky factorization of L - c I with c just below the certificate;
    larger sparse matrices by a Lanczos estimate of the smallest eigenvalue.

    Raises:
        PreconditionError: If the spectrum reaches below the certificate
    """
    bound = op.spectrum_lower_bound
    c = bound * (1.0 - CERTIFICATE_MARGIN)

    if isinstance(op, DiagonalOperator):
        holds = float(op.eigenvalues.min()) >= c
    elif isinstance(op, DenseSPDOperator) or op.dim <= ORACLE_MAX_DIM:
        matrix = op.matrix.toarray() if scipy.sparse.issparse(op.matrix) else op.matrix
        try:
            scipy.linalg.cho_factor(matrix - c * np.eye(op.dim), lower=True, check_finite=False)
            holds = True
        except np.linalg.LinAlgError:
            holds = False
    else:
        holds = _smallest_eigenvalue(op.matrix) >= c

    if not holds:
        raise PreconditionError(
            f"the spectrum is not bounded below by {bound:.6g}",
            field="spectrum_lower_bound",
            value=bound,
            hint="pass the certified bound with --spectrum-lower-bound",
        )
    logger.debug("Spectrum certificate %.6g verified (dim=%d)", bound, op.dim)


# =============================================================================
# Application
# =============================================================================


def _as_vector(g: npt.ArrayLike, dim: int) -> np.ndarray:
    vector = np.asarray(g, dtype=float)
    if vector.ndim != 1 or vector.size != dim:
        raise DimensionMismatchError(
            f"vector has shape {vector.shape}, operator dimension is {dim}",
            expected=dim,
            actual=int(vector.size),
        )
    return vector


def apply_fracpow(
    rule: QuadratureRule,
    op: ShiftedSolveOperator,
    g: npt.ArrayLike,
    *,
    max_workers: Optional[int] = None,
) -> FracpowResult:
    """
    Approximate L^{-alpha} g with the rule.

    Args:
        rule: Quadrature rule (its order fixes alpha)
        op: Operator backend with a certificate >= 1
        g: Right-hand side of length op.dim
        max_workers: Worker pool bound (FRACPOW_THREADS when omitted)

    Raises:
        PreconditionError: If op.spectrum_lower_bound < 1
        DimensionMismatchError: If g does not match op.dim
        SolveError: If a shifted solve breaks down
    """
    if op.spectrum_lower_bound < SPECTRUM_FLOOR:
        raise PreconditionError(
            f"spectrum lower bound {op.spectrum_lower_bound:.6g} is below 1",
            field="spectrum_lower_bound",
            value=op.spectrum_lower_bound,
            hint=SCALING_HINT,
        )
    g = _as_vector(g, op.dim)
    if max_workers is None:
        max_workers = RuntimeSettings.from_env().threads

    active = [int(k) for k in rule.active]
    weights = rule.weights
    shifts = rule.shifts

    if not active:
        return FracpowResult(np.zeros_like(g), 0, ())

    with timed_block("apply_fracpow"):
        op.prepare(shifts[active])

        def job(k: int) -> tuple[np.ndarray, SolveRecord]:
            x, iterations, residual = op.solve_detailed(float(shifts[k]), g)
            return x, SolveRecord(
                index=k - rule.M,
                shift=float(shifts[k]),
                iterations=iterations,
                residual=residual,
            )

        outcomes = ordered_map(job, active, max_workers)
        vector = compensated_sum(weights[k] * x for k, (x, _) in zip(active, outcomes))

    logger.debug(
        "Applied %s rule: %d of %d terms, dim=%d",
        rule.transform.value,
        len(active),
        rule.n,
        op.dim,
    )
    return FracpowResult(
        vector=vector,
        terms_applied=len(active),
        solver_stats=tuple(record for _, record in outcomes),
    )


def scaled_fracpow(
    rule: QuadratureRule,
    op: ShiftedSolveOperator,
    g: npt.ArrayLike,
    *,
    lower_bound: Optional[float] = None,
    max_workers: Optional[int] = None,
) -> np.ndarray:
    """
    L^{-alpha} g = m^{-alpha} (L/m)^{-alpha} g for a certificate m > 0.

    Args:
        lower_bound: Certificate m; op.spectrum_lower_bound when omitted

    Raises:
        ParameterDomainError: If m <= 0
    """
    m = op.spectrum_lower_bound if lower_bound is None else lower_bound
    m = validate_positive(m, "spectrum_lower_bound")
    shifted_op = op.scaled(1.0 / m)
    if shifted_op.spectrum_lower_bound < SPECTRUM_FLOOR:
        # m is the certificate; rounding in bound/m must not reject it
        shifted_op.spectrum_lower_bound = SPECTRUM_FLOOR
    result = apply_fracpow(rule, shifted_op, g, max_workers=max_workers)
    return m ** (-rule.order.alpha) * result.vector


# =============================================================================
# Oracles and test operators
# =============================================================================


def operator_error_sup(rule: QuadratureRule, op: DiagonalOperator) -> float:
    """max over eigenvalues of |lambda^{-alpha} - rule(lambda)|."""
    exact = np.power(op.eigenvalues, -rule.order.alpha)
    return float(np.max(np.abs(exact - eval_rule_many(rule, op.eigenvalues))))


def spectral_oracle(
    op: Union[DenseSPDOperator, DiagonalOperator],
    order: FractionalOrder,
    g: npt.ArrayLike,
) -> np.ndarray:
    """
    Reference L^{-alpha} g from a full symmetric eigendecomposition.

    Raises:
        OracleError: If dim > 2000, the eigensolver fails or an eigenvalue is not positive
    """
    g = _as_vector(g, op.dim)
    if isinstance(op, DiagonalOperator):
        return np.power(op.eigenvalues, -order.alpha) * g

    if op.dim > ORACLE_MAX_DIM:
        raise OracleError(
            f"spectral oracle is limited to dim <= {ORACLE_MAX_DIM}",
            details={"dim": op.dim},
        )
    try:
        eigenvalues, vectors = scipy.linalg.eigh(op.matrix)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise OracleError(f"eigendecomposition failed: {exc}") from exc
    if eigenvalues[0] <= 0.0:
        raise OracleError(
            "matrix is not positive definite",
            details={"min_eigenvalue": float(eigenvalues[0])},
        )
    return vectors @ (np.power(eigenvalues, -order.alpha) * (vectors.T @ g))


def artificial_operator(size: int = 100, power: int = 8) -> DiagonalOperator:
    """diag(1, 2, ..., size)^power, spectrum [1, size^power]."""
    eigenvalues = np.power(np.arange(1, size + 1, dtype=float), power)
    return DiagonalOperator(eigenvalues, spectrum_lower_bound=1.0)


def laplacian_1d(dim: int, *, sparse: bool = False) -> Union[DenseSPDOperator, IterativeOperator]:
    """
    Tridiagonal (2, -1) stiffness matrix scaled so its smallest eigenvalue is 1.

    Args:
        dim: Matrix dimension
        sparse: Return the CG backend instead of the dense one
    """
    lambda_min = 4.0 * math.sin(math.pi / (2.0 * (dim + 1))) ** 2
    stencil = scipy.sparse.diags(
        [-np.ones(dim - 1), 2.0 * np.ones(dim), -np.ones(dim - 1)],
        offsets=[-1, 0, 1],
        format="csr",
    ) / lambda_min
    if sparse:
        return IterativeOperator(stencil, spectrum_lower_bound=1.0)
    return DenseSPDOperator(stencil.toarray(), spectrum_lower_bound=1.0)
