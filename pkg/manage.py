"""
Command-line interface for fracpow.

Provides CLI commands for:
- Printing the nodes of an SE or DE rule
- Scalar lambda^{-alpha} approximation with errors and estimates
- Applying a rule to a Matrix Market operator or the artificial operator
- Printing error estimates with their derived parameters
- Reproducing the reference figures as CSV

CSV and text results go to stdout (or --out); logs and errors go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from contextlib import contextmanager
from typing import Iterator, Optional, Sequence, TextIO

import numpy as np

from fracpow.config import ESTIMATE_KINDS, SOLVERS, TRANSFORMS, RunConfig, RuntimeSettings
from fracpow.estimates import (
    de_estimate_okayama,
    de_estimate_scalar,
    de_operator_estimate,
    estimate_for,
    se_bound,
    se_truncated_bound,
)
from fracpow.exceptions import ConfigurationError, FracpowError, InputFileError, PreconditionError
from fracpow.figures import CsvTable, build_figure
from fracpow.kernel import HALF_PI, FractionalOrder, QuadratureRule, Transform, direct_power, eval_rule_many
from fracpow.logger import configure_logging
from fracpow.matrix_io import load_operator, read_vector, write_vector
from fracpow.operator import (
    DiagonalOperator,
    apply_fracpow,
    artificial_operator,
    operator_error_sup,
    scaled_fracpow,
    subordinate_cg_tolerance,
    verify_spectrum_lower_bound,
)
from fracpow.params import (
    DEConfig,
    de_config,
    equalized_tau,
    se_params_from_h,
    se_params_from_n,
    strip_halfwidth,
    tau_star,
)
from fracpow.performance import get_timings
from fracpow.validators import SPECTRUM_FLOOR

logger = logging.getLogger("fracpow.cli")

COMMAND_HELP = {
    "nodes": "Print the nodes of the rule as CSV",
    "scalar": "Approximate lambda^{-alpha} at one or more lambdas",
    "operator": "Apply the rule to a matrix or the artificial operator",
    "estimate": "Print an error estimate and the derived parameters",
    "figure": "Write the data of a reference figure as CSV",
}


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per operation and shared flags."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default values for the flags below")
    common.add_argument("--transform", choices=TRANSFORMS, help="Quadrature transform (default: se)")
    common.add_argument("--alpha", type=float, help="Fractional exponent in (0, 1)")
    common.add_argument("--n", type=int, help="SE target inversion count, or DE index (M = N = n)")
    common.add_argument("--h", type=float, help="SE step size (instead of --n)")
    common.add_argument("--d", type=float, help="Strip half-width")
    common.add_argument("--d-pi-over", dest="d_pi_over", type=int, help="Strip half-width pi/K")
    common.add_argument("--tau", type=float, help="DE scaling parameter (default: tau*)")
    common.add_argument("--r", type=float, help="Strip safety factor in (0, 1) (default: 0.95)")
    common.add_argument("--lambda", dest="lambda", help="Comma-separated scalar arguments >= 1")
    common.add_argument("--matrix", help="Matrix Market file")
    common.add_argument("--vector", help="Right-hand side, one value per line (default: ones)")
    common.add_argument("--artificial", action="store_true", default=None, help="Use diag(1..100)^8")
    common.add_argument(
        "--spectrum-lower-bound",
        dest="spectrum_lower_bound",
        type=float,
        help="Certified lower bound of the spectrum (default: 1, verified for --matrix)",
    )
    common.add_argument("--solver", choices=SOLVERS, help="Shifted-solve backend")
    common.add_argument(
        "--cg-tol",
        dest="cg_tol",
        type=float,
        help="CG relative tolerance (default: min(1e-12, 0.01 * estimate), at least 1e-14)",
    )
    common.add_argument(
        "--diag-exact",
        dest="diag_exact",
        action="store_true",
        default=None,
        help="Report the exact sup error (diagonal operators)",
    )
    common.add_argument("--out", help="Output file (default: stdout)")
    common.add_argument("--figure", type=int, choices=(1, 2, 3, 4), help="Figure id")
    common.add_argument("--kind", choices=ESTIMATE_KINDS, help="Estimate to print")
    common.add_argument(
        "--refine-tau",
        dest="refine_tau",
        action="store_true",
        default=None,
        help="Solve the tau equalization numerically instead of using tau*",
    )
    common.add_argument(
        "--exact-root",
        dest="exact_root",
        action="store_true",
        default=None,
        help="Use the unrounded tau* coefficient",
    )

    parser = argparse.ArgumentParser(
        description="Fractional powers by SE/DE trapezoidal quadrature",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Nodes of the SE rule with h = 1, d = pi/2
  python manage.py nodes --transform se --alpha 0.5 --h 1 --d-pi-over 2

  # Scalar approximation with the DE rule
  python manage.py scalar --transform de --alpha 0.5 --n 40 --lambda 1,1e8

  # Operator estimate
  python manage.py estimate --kind fest --alpha 0.5 --n 40
        """,
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands")
    for command, help_text in COMMAND_HELP.items():
        subparsers.add_parser(command, parents=[common], help=help_text)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Main CLI entry point.

    Returns:
        Exit code (0 for success, the error's exit code otherwise)
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 1

    try:
        settings = RuntimeSettings.from_env()
        configure_logging(settings)
        get_timings().clear()

        flags = {
            key: value
            for key, value in vars(args).items()
            if key not in ("command", "config")
        }
        config = RunConfig.from_sources(args.command, flags, args.config).validate()

        handler = HANDLERS[config.command]
        return handler(config, settings)

    except FracpowError as exc:
        print(f"Error: {exc.message}", file=sys.stderr)
        if exc.details:
            print(f"Details: {exc.details}", file=sys.stderr)
        return exc.exit_code

    except Exception as exc:
        logger.debug("Unexpected failure", exc_info=True)
        print(f"Unexpected error: {exc}", file=sys.stderr)
        return 1

    finally:
        logger.debug("Timings: %s", get_timings().summary())


# =============================================================================
# Helpers
# =============================================================================


@contextmanager
def _output(path: Optional[str]) -> Iterator[TextIO]:
    if not path:
        yield sys.stdout
        return
    try:
        stream = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise InputFileError(f"Cannot write output file: {exc}", path=path) from exc
    with stream:
        yield stream


def _emit(table: CsvTable, path: Optional[str]) -> None:
    with _output(path) as stream:
        table.write(stream)


def _de_config(config: RunConfig, order: FractionalOrder) -> DEConfig:
    tau = config.tau
    if tau is None and config.refine_tau:
        tau = equalized_tau(config.n, order, config.r)
    return de_config(
        config.n,
        order,
        config.r,
        tau=tau,
        d=config.effective_d,
        exact_root=config.exact_root,
    )


def build_rule(config: RunConfig) -> tuple[QuadratureRule, Optional[DEConfig]]:
    """Rule described by the config, plus the DE bundle when applicable."""
    order = FractionalOrder(config.alpha)
    if config.transform == Transform.SE.value:
        d = config.effective_d or HALF_PI
        if config.h is not None:
            params = se_params_from_h(order, config.h, d)
        else:
            params = se_params_from_n(order, config.n, d)
        return params.build_rule(), None

    bundle = _de_config(config, order)
    return bundle.build_rule(), bundle


def _provenance(rule: QuadratureRule, bundle: Optional[DEConfig]) -> str:
    items = dict(rule.describe())
    if bundle is not None:
        items["s_n"] = bundle.s_n
        items["r"] = bundle.r
    return " ".join(f"{key}={value!r}" if isinstance(value, float) else f"{key}={value}" for key, value in items.items())


# =============================================================================
# Commands
# =============================================================================


def handle_nodes(config: RunConfig, settings: RuntimeSettings) -> int:
    """Handle 'nodes' command."""
    rule, bundle = build_rule(config)
    table = CsvTable(columns=("index", "log_weight", "weight", "shift"))
    table.comments.append(_provenance(rule, bundle))
    for index, term in zip(rule.indices, rule.terms):
        table.add(index, term.log_weight, term.weight, term.shift)
    _emit(table, config.out)
    return 0


def _se_estimate(rule: QuadratureRule, config: RunConfig) -> float:
    """Balanced bound for --n, the explicit-parameter bound for --h."""
    if config.n is not None:
        return se_bound(rule.order, config.n, rule.d).value
    return se_truncated_bound(rule.order, rule.h, rule.M, rule.N, rule.d, scaled=True)


def _scalar_estimate(
    rule: QuadratureRule,
    bundle: Optional[DEConfig],
    config: RunConfig,
    lam: float,
) -> float:
    order = rule.order
    if bundle is None:
        return _se_estimate(rule, config)
    try:
        return de_estimate_scalar(lam, bundle.tau, bundle.n, order, bundle.r).value
    except PreconditionError as exc:
        logger.warning("No DE estimate at lambda=%g: %s", lam, exc.message)
        return math.nan


def handle_scalar(config: RunConfig, settings: RuntimeSettings) -> int:
    """Handle 'scalar' command."""
    rule, bundle = build_rule(config)
    lams = np.asarray(config.lambdas, dtype=float)
    approx = eval_rule_many(rule, lams)
    exact = direct_power(lams, rule.order)

    table = CsvTable(columns=("lambda", "n", "approx", "exact", "abs_error", "estimate"))
    table.comments.append(_provenance(rule, bundle))
    for lam, value, reference in zip(lams, approx, exact):
        table.add(
            float(lam),
            rule.n,
            float(value),
            float(reference),
            abs(float(reference) - float(value)),
            _scalar_estimate(rule, bundle, config, float(lam)),
        )
    _emit(table, config.out)
    return 0


def _operator_estimate(rule: QuadratureRule, bundle: Optional[DEConfig], config: RunConfig) -> float:
    if bundle is None:
        return _se_estimate(rule, config)
    return de_operator_estimate(bundle.n, rule.order, bundle.r).value


def handle_operator(config: RunConfig, settings: RuntimeSettings) -> int:
    """Handle 'operator' command."""
    if not config.out:
        raise ConfigurationError("--out is required for the result vector")

    rule, bundle = build_rule(config)
    estimate = _operator_estimate(rule, bundle, config)

    if config.artificial:
        op = artificial_operator()
    else:
        cg_tol = config.cg_tol
        if cg_tol is None:
            cg_tol = subordinate_cg_tolerance(estimate)
            logger.debug("CG tolerance %.3g from estimate %.3g", cg_tol, estimate)
        op = load_operator(
            config.matrix,
            solver=config.solver,
            spectrum_lower_bound=config.spectrum_lower_bound or SPECTRUM_FLOOR,
            cg_tol=cg_tol,
        )
        if config.spectrum_lower_bound is None:
            verify_spectrum_lower_bound(op)

    g = read_vector(config.vector) if config.vector else np.ones(op.dim)

    if op.spectrum_lower_bound < SPECTRUM_FLOOR:
        logger.info("Scaling by the certificate %.6g", op.spectrum_lower_bound)
        vector = scaled_fracpow(rule, op, g, max_workers=settings.threads)
        terms_applied = rule.active_count
    else:
        result = apply_fracpow(rule, op, g, max_workers=settings.threads)
        vector = result.vector
        terms_applied = result.terms_applied
        iterations = sum(record.iterations for record in result.solver_stats)
        if iterations:
            logger.info("CG iterations over all shifts: %d", iterations)

    write_vector(config.out, vector)

    columns = ["n", "terms_applied", "estimate"]
    row = [rule.n, terms_applied, estimate]
    if config.diag_exact:
        if not isinstance(op, DiagonalOperator):
            raise ConfigurationError("--diag-exact needs a diagonal operator")
        columns.append("sup_error")
        row.append(operator_error_sup(rule, op))

    table = CsvTable(columns=tuple(columns))
    table.comments.append(_provenance(rule, bundle))
    table.add(*row)
    table.write(sys.stdout)
    return 0


def handle_estimate(config: RunConfig, settings: RuntimeSettings) -> int:
    """Handle 'estimate' command."""
    order = FractionalOrder(config.alpha)
    lines: list[tuple[str, object]] = [("kind", config.kind), ("alpha", order.alpha), ("n", config.n)]

    if config.kind == "se":
        d = config.effective_d or HALF_PI
        params = se_params_from_n(order, config.n, d)
        estimate = estimate_for("se", order, config.n, d=d)
        lines += [("d", d), ("h", params.h), ("M", params.M), ("N", params.N), ("inversions", params.n)]
    else:
        bundle = _de_config(config, order)
        lines += [
            ("r", bundle.r),
            ("tau_star", tau_star(config.n, order, config.r, exact_root=config.exact_root)),
            ("tau", bundle.tau),
            ("s_n", bundle.s_n),
            ("d", bundle.d),
            ("h", bundle.h),
            ("M", bundle.n),
            ("N", bundle.n),
        ]
        if config.kind == "fest":
            estimate = de_operator_estimate(config.n, order, config.r)
        else:
            lam = config.lambdas[0]
            tau = bundle.tau
            lines += [("lambda", lam), ("d_lambda", strip_halfwidth(lam, tau, config.r))]
            if config.kind == "ere":
                estimate = de_estimate_scalar(lam, tau, config.n, order, config.r)
            else:
                estimate = de_estimate_okayama(lam, tau, config.n, order, config.r)

    lines.append(("value", estimate.value))
    with _output(config.out) as stream:
        for key, value in lines:
            text = repr(value) if isinstance(value, float) else str(value)
            stream.write(f"{key}: {text}\n")
    return 0


def handle_figure(config: RunConfig, settings: RuntimeSettings) -> int:
    """Handle 'figure' command."""
    table = build_figure(
        config.figure,
        alpha=config.alpha,
        r=config.r,
        max_workers=settings.threads,
    )
    _emit(table, config.out)
    return 0


HANDLERS = {
    "nodes": handle_nodes,
    "scalar": handle_scalar,
    "operator": handle_operator,
    "estimate": handle_estimate,
    "figure": handle_figure,
}


if __name__ == "__main__":
    sys.exit(main())
