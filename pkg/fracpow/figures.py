"""
Sweeps behind the four reference figures, and CSV output.

Each figure is returned as a CsvTable: a header, rows in deterministic order
and optional '#' comment lines carrying the parameters used. Sweep points are
independent and run on the bounded worker pool; rows are assembled in grid
order afterwards.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence, TextIO

import numpy as np

from .config import RuntimeSettings
from .estimates import (
    de_estimate_okayama,
    de_estimate_scalar,
    de_operator_estimate,
    de_phi,
    de_phi_at_lambda_star,
    de_phi_at_one,
    de_phi_grid,
    se_bound,
)
from .exceptions import ParameterDomainError
from .kernel import HALF_PI, FractionalOrder, build_de_rule, direct_power, eval_rule
from .operator import artificial_operator, operator_error_sup
from .params import DEFAULT_R, de_config, de_step, lambda_star, se_params_from_n, strip_halfwidth, tau_star
from .performance import ordered_map, timed

logger = logging.getLogger(__name__)

FIGURE_ALPHAS = (0.25, 0.5, 0.75)
SE_DE_GRID = (25, 50, 100, 150, 200, 250, 300, 350, 400)
SCALAR_DE_GRID = tuple(range(5, 201, 5))

FIG2_LAMBDA = 1e12
FIG2_TAU = 100.0
FIG2_ALPHA = 0.5

FIG3_N = 40
FIG3_ALPHA = 0.5
FIG3_LAMBDA_MAX = 1e20
FIG3_POINTS = 2000


def format_value(value: Any) -> str:
    """Shortest round-trip text for floats, str() otherwise."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


@dataclass
class CsvTable:
    """Header plus rows, written as CSV with leading '#' comment lines."""

    columns: tuple[str, ...]
    rows: list[tuple[Any, ...]] = field(default_factory=list)
    comments: list[str] = field(default_factory=list)

    def add(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ParameterDomainError(
                f"row has {len(values)} values for {len(self.columns)} columns",
                field="row",
            )
        self.rows.append(values)

    def write(self, stream: TextIO) -> None:
        for comment in self.comments:
            stream.write(f"# {comment}\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_value(value) for value in row])

    def column(self, name: str) -> list[Any]:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]


@dataclass(frozen=True)
class SweepRecord:
    """One point of an error-versus-n sweep."""

    n: int
    inversions: int
    measured_error: float
    estimate_se: Optional[float] = None
    estimate_de: Optional[float] = None
    estimate_okayama: Optional[float] = None


def _run_sweep(
    job: Callable[[Any], Any],
    points: Sequence[Any],
    max_workers: Optional[int],
) -> list[Any]:
    if max_workers is None:
        max_workers = RuntimeSettings.from_env().threads
    return ordered_map(job, points, max_workers)


# =============================================================================
# Figure 1: SE on the artificial operator, d = pi/4 against d = pi/2
# =============================================================================


@timed()
def figure_se_strip(
    alphas: Sequence[float] = FIGURE_ALPHAS,
    n_grid: Sequence[int] = SE_DE_GRID,
    *,
    max_workers: Optional[int] = None,
) -> CsvTable:
    op = artificial_operator()
    points = [(alpha, n) for alpha in alphas for n in n_grid]

    def job(point: tuple[float, int]) -> tuple[float, float, float]:
        alpha, n = point
        order = FractionalOrder(alpha)
        quarter = operator_error_sup(se_params_from_n(order, n, math.pi / 4).build_rule(), op)
        half = operator_error_sup(se_params_from_n(order, n, HALF_PI).build_rule(), op)
        return quarter, half, se_bound(order, n, HALF_PI).value

    table = CsvTable(columns=("alpha", "n", "err_d_pi4", "err_d_pi2", "bound"))
    table.comments.append("operator=diag(1..100)^8 transform=se")
    for (alpha, n), (quarter, half, bound) in zip(points, _run_sweep(job, points, max_workers)):
        table.add(alpha, n, quarter, half, bound)
    return table


# =============================================================================
# Figure 2: scalar DE error against the two estimators
# =============================================================================


def scalar_de_sweep(
    lam: float = FIG2_LAMBDA,
    tau: float = FIG2_TAU,
    alpha: float = FIG2_ALPHA,
    n_grid: Sequence[int] = SCALAR_DE_GRID,
    r: float = DEFAULT_R,
    *,
    max_workers: Optional[int] = None,
) -> list[SweepRecord]:
    """
    DE error at one lambda with the step taken from d(lambda, tau).
    """
    order = FractionalOrder(alpha)
    d = strip_halfwidth(lam, tau, r)
    exact = direct_power(lam, order)

    def job(n: int) -> SweepRecord:
        rule = build_de_rule(order, tau, de_step(n, d, order), n, d=d)
        return SweepRecord(
            n=n,
            inversions=rule.n,
            measured_error=abs(exact - eval_rule(rule, lam)),
            estimate_de=de_estimate_scalar(lam, tau, n, order, r).value,
            estimate_okayama=de_estimate_okayama(lam, tau, n, order, r).value,
        )

    return _run_sweep(job, list(n_grid), max_workers)


@timed()
def figure_de_estimators(
    alpha: float = FIG2_ALPHA,
    *,
    r: float = DEFAULT_R,
    max_workers: Optional[int] = None,
) -> CsvTable:
    table = CsvTable(columns=("n", "inversions", "err_de", "ere", "ere2"))
    table.comments.append(f"lambda={FIG2_LAMBDA:g} tau={FIG2_TAU:g} alpha={alpha:g} r={r:g}")
    for record in scalar_de_sweep(alpha=alpha, r=r, max_workers=max_workers):
        table.add(
            record.n,
            record.inversions,
            record.measured_error,
            record.estimate_de,
            record.estimate_okayama,
        )
    return table


# =============================================================================
# Figure 3: the phi landscape at tau*
# =============================================================================


@timed()
def figure_phi_landscape(
    alpha: float = FIG3_ALPHA,
    n: int = FIG3_N,
    *,
    r: float = DEFAULT_R,
    points: int = FIG3_POINTS,
    lambda_max: float = FIG3_LAMBDA_MAX,
) -> CsvTable:
    """
    phi(lambda, tau*) on a log grid over [1, lambda_max], then marker rows
    for tau*, lambda* (closed-form peak value), lambda = 1 (closed form) and
    the grid argmax. Grid rows have an empty marker; NaN marks grid points
    where the step condition fails.
    """
    order = FractionalOrder(alpha)
    tau = tau_star(n, order, r)
    peak_at = lambda_star(n, order, tau, r)
    grid = np.logspace(0.0, math.log10(lambda_max), points)
    values = de_phi_grid(grid, tau, n, order, r)

    table = CsvTable(columns=("lambda", "phi", "marker"))
    table.comments.append(f"n={n} alpha={alpha:g} r={r:g} tau_star={tau!r} lambda_star={peak_at!r}")
    for lam, phi in zip(grid, values):
        table.add(float(lam), float(phi), "")

    beyond_tau = grid >= tau
    masked = np.where(beyond_tau, values, np.nan)
    argmax = int(np.nanargmax(masked))

    table.add(tau, de_phi(tau, tau, n, order, r), "tau_star")
    table.add(peak_at, de_phi_at_lambda_star(tau, n, order, r), "lambda_star")
    table.add(1.0, de_phi_at_one(tau, n, order, r), "at_one")
    table.add(float(grid[argmax]), float(values[argmax]), "argmax")
    return table


# =============================================================================
# Figure 4: DE against SE on the artificial operator
# =============================================================================


@timed()
def figure_de_vs_se(
    alphas: Sequence[float] = FIGURE_ALPHAS,
    n_grid: Sequence[int] = SE_DE_GRID,
    *,
    r: float = DEFAULT_R,
    max_workers: Optional[int] = None,
) -> CsvTable:
    """
    Sup error on the artificial operator at equal cost. n is the DE index
    (M = N = n, 2n + 1 inversions); the SE rule targets the same 2n + 1
    inversions, rounded up by its own balancing.
    """
    op = artificial_operator()
    points = [(alpha, n) for alpha in alphas for n in n_grid]

    def job(point: tuple[float, int]) -> tuple[int, int, float, float, float]:
        alpha, n = point
        order = FractionalOrder(alpha)
        de_rule = de_config(n, order, r).build_rule()
        se_rule = se_params_from_n(order, de_rule.n, HALF_PI).build_rule()
        return (
            de_rule.n,
            se_rule.n,
            operator_error_sup(de_rule, op),
            operator_error_sup(se_rule, op),
            de_operator_estimate(n, order, r).value,
        )

    table = CsvTable(columns=("alpha", "n", "inversions_de", "inversions_se", "err_de", "err_se", "fest"))
    table.comments.append(f"operator=diag(1..100)^8 r={r:g}")
    for (alpha, n), values in zip(points, _run_sweep(job, points, max_workers)):
        table.add(alpha, n, *values)
    return table


def build_figure(
    figure: int,
    *,
    alpha: Optional[float] = None,
    r: float = DEFAULT_R,
    max_workers: Optional[int] = None,
) -> CsvTable:
    """
    Dispatch by figure id. alpha only applies to figures 2 and 3.

    Raises:
        ParameterDomainError: If figure is not 1..4
    """
    logger.info("Building figure %s", figure)
    if figure == 1:
        return figure_se_strip(max_workers=max_workers)
    if figure == 2:
        return figure_de_estimators(FIG2_ALPHA if alpha is None else alpha, r=r, max_workers=max_workers)
    if figure == 3:
        return figure_phi_landscape(FIG3_ALPHA if alpha is None else alpha, r=r)
    if figure == 4:
        return figure_de_vs_se(r=r, max_workers=max_workers)
    raise ParameterDomainError("figure must be 1, 2, 3 or 4", field="figure", value=figure)
