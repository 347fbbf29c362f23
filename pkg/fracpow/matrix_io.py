"""
Matrix Market and vector text I/O.

Matrices are symmetric real Matrix Market files (coordinate or array);
vectors are whitespace-separated text, one value per line.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
import numpy.typing as npt
import scipy.io
import scipy.sparse

from .exceptions import ConfigurationError, InputFileError
from .operator import (
    CG_TOLERANCE_CAP,
    ORACLE_MAX_DIM,
    DenseSPDOperator,
    DiagonalOperator,
    IterativeOperator,
    ShiftedSolveOperator,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def read_matrix(path: PathLike) -> Union[np.ndarray, scipy.sparse.csr_matrix]:
    """
    Read a real Matrix Market file.

    Returns:
        Dense ndarray for array format, CSR matrix for coordinate format

    Raises:
        InputFileError: If the file is missing, malformed or not real-valued
    """
    path = Path(path)
    try:
        matrix = scipy.io.mmread(str(path))
    except (OSError, ValueError, IndexError, RuntimeError) as exc:
        raise InputFileError(f"Cannot read Matrix Market file: {exc}", path=str(path)) from exc

    if scipy.sparse.issparse(matrix):
        matrix = scipy.sparse.csr_matrix(matrix)
        dtype = matrix.dtype
    else:
        matrix = np.asarray(matrix)
        dtype = matrix.dtype

    if np.issubdtype(dtype, np.complexfloating):
        raise InputFileError("Matrix Market file must be real-valued", path=str(path))

    logger.debug("Read %s matrix %s from %s", "sparse" if scipy.sparse.issparse(matrix) else "dense", matrix.shape, path)
    return matrix.astype(float)


def load_operator(
    path: PathLike,
    *,
    solver: Optional[str] = None,
    spectrum_lower_bound: float = 1.0,
    cg_tol: float = CG_TOLERANCE_CAP,
) -> ShiftedSolveOperator:
    """
    Read a matrix and wrap it in a shifted-solve backend.

    Args:
        path: Matrix Market file
        solver: 'diag', 'dense' or 'cg'; dense up to 2000 rows, cg above, when omitted
        spectrum_lower_bound: Caller certificate for the spectrum
        cg_tol: Relative residual tolerance of the CG backend

    Raises:
        InputFileError: If the file cannot be read
        NonSymmetricMatrixError: If the matrix is not symmetric
        ConfigurationError: If 'diag' is requested for a non-diagonal matrix
    """
    matrix = read_matrix(path)
    dim = matrix.shape[0]
    if solver is None:
        solver = "dense" if dim <= ORACLE_MAX_DIM else "cg"

    if solver == "diag":
        dense = matrix.toarray() if scipy.sparse.issparse(matrix) else matrix
        diagonal = np.diag(dense).copy()
        if np.count_nonzero(dense - np.diag(diagonal)):
            raise ConfigurationError("--solver diag needs a diagonal matrix", details={"path": str(path)})
        return DiagonalOperator(diagonal, spectrum_lower_bound)

    if solver == "dense":
        dense = matrix.toarray() if scipy.sparse.issparse(matrix) else matrix
        return DenseSPDOperator(dense, spectrum_lower_bound)

    if solver == "cg":
        return IterativeOperator(matrix, spectrum_lower_bound, cg_tolerance=cg_tol)

    raise ConfigurationError(f"Unknown solver '{solver}'", details={"solver": solver})


def read_vector(path: PathLike) -> np.ndarray:
    """
    Read a vector, one value per line.

    Raises:
        InputFileError: If the file is missing, malformed or not one-dimensional
    """
    path = Path(path)
    try:
        vector = np.loadtxt(path, dtype=float, ndmin=1)
    except (OSError, ValueError) as exc:
        raise InputFileError(f"Cannot read vector file: {exc}", path=str(path)) from exc

    if vector.ndim != 1:
        raise InputFileError(
            f"vector file must hold one value per line, got shape {vector.shape}",
            path=str(path),
        )
    return vector


def write_vector(path: PathLike, vector: npt.ArrayLike) -> None:
    """
    Write a vector with round-trip precision.

    Raises:
        InputFileError: If the file cannot be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(path, np.asarray(vector, dtype=float).ravel(), fmt="%.17g")
    except OSError as exc:
        raise InputFileError(f"Cannot write vector file: {exc}", path=str(path)) from exc
