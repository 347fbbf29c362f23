"""
Runtime configuration management.

This module loads process-level settings from environment variables (an
optional ``.env`` file is read at import time) and assembles the per-run
configuration of the command-line driver from a JSON file overlaid by flags.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Optional

from dotenv import load_dotenv

from .exceptions import ConfigurationError, InputFileError, ParameterDomainError
from .validators import (
    validate_alpha,
    validate_at_least,
    validate_half_open_interval,
    validate_integer,
    validate_open_interval,
    validate_positive,
    validate_spectral_point,
)

load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_MAX_THREADS = 8
DEFAULT_R = 0.95

COMMANDS = ("nodes", "scalar", "operator", "estimate", "figure")
TRANSFORMS = ("se", "de")
SOLVERS = ("diag", "dense", "cg")
ESTIMATE_KINDS = ("se", "ere", "ere2", "fest")
FIGURES = (1, 2, 3, 4)


def _env_bool(name: str, default: bool = False) -> bool:
    """
    Parse boolean from environment variable.

    Accepts: '1', 'true', 't', 'yes', 'y' (case-insensitive) as True

    Args:
        name: Environment variable name
        default: Default value if variable is not set

    Returns:
        Parsed boolean value
    """
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() in {"1", "true", "t", "yes", "y"}


def _default_threads() -> int:
    return max(1, min(os.cpu_count() or 1, DEFAULT_MAX_THREADS))


@dataclass(frozen=True)
class RuntimeSettings:
    """
    Process-wide settings.

    Attributes:
        threads: Bound of every worker pool (FRACPOW_THREADS)
        debug: Verbose logging (FRACPOW_DEBUG)
        log_level: Explicit level name overriding debug (FRACPOW_LOG_LEVEL)
    """

    threads: int
    debug: bool = False
    log_level: Optional[str] = None

    @classmethod
    def from_env(cls) -> RuntimeSettings:
        """
        Load settings from environment variables.

        Environment variables:
            FRACPOW_THREADS: Worker pool bound (default: cpu count capped at 8)
            FRACPOW_DEBUG: Enable DEBUG logging
            FRACPOW_LOG_LEVEL: Level name such as WARNING

        Raises:
            ConfigurationError: If a variable holds an invalid value
        """
        raw_threads = os.getenv("FRACPOW_THREADS", "").strip()
        if raw_threads:
            try:
                threads = int(raw_threads)
            except ValueError as exc:
                raise ConfigurationError(
                    "FRACPOW_THREADS must be an integer",
                    details={"value": raw_threads},
                ) from exc
            if threads < 1:
                raise ConfigurationError(
                    "FRACPOW_THREADS must be at least 1",
                    details={"value": threads},
                )
        else:
            threads = _default_threads()

        log_level = os.getenv("FRACPOW_LOG_LEVEL", "").strip().upper() or None
        if log_level is not None and not isinstance(logging.getLevelName(log_level), int):
            raise ConfigurationError(
                f"Unknown FRACPOW_LOG_LEVEL '{log_level}'",
                details={"value": log_level},
            )

        return cls(
            threads=threads,
            debug=_env_bool("FRACPOW_DEBUG", False),
            log_level=log_level,
        )

    @property
    def level(self) -> int:
        """Effective logging level."""
        if self.log_level:
            return logging.getLevelName(self.log_level)
        return logging.DEBUG if self.debug else logging.INFO


@dataclass
class RunConfig:
    """
    Configuration of one CLI invocation.

    Keys of the JSON file equal the long flag names with dashes replaced by
    underscores; explicitly given flags override file values.
    """

    command: str
    transform: str = "se"
    alpha: Optional[float] = None
    n: Optional[int] = None
    h: Optional[float] = None
    d: Optional[float] = None
    d_pi_over: Optional[int] = None
    tau: Optional[float] = None
    r: float = DEFAULT_R
    lambdas: tuple[float, ...] = ()
    matrix: Optional[str] = None
    vector: Optional[str] = None
    artificial: bool = False
    spectrum_lower_bound: Optional[float] = None
    solver: Optional[str] = None
    cg_tol: Optional[float] = None
    diag_exact: bool = False
    out: Optional[str] = None
    figure: Optional[int] = None
    kind: Optional[str] = None
    refine_tau: bool = False
    exact_root: bool = False

    @classmethod
    def from_sources(
        cls,
        command: str,
        flags: Mapping[str, Any],
        config_path: Optional[str] = None,
    ) -> RunConfig:
        """
        Merge a JSON config file with explicitly given flags.

        Args:
            command: Subcommand name
            flags: Flag values; None means "not given"
            config_path: Optional JSON file

        Raises:
            InputFileError: If the file is unreadable or not valid JSON
            ConfigurationError: If the file holds unknown keys or bad types
        """
        merged: dict[str, Any] = {}
        if config_path:
            merged.update(load_config_file(config_path))
        merged.update({key: value for key, value in flags.items() if value is not None})

        if "lambda" in merged:
            merged["lambdas"] = parse_lambda_list(merged.pop("lambda"))

        known = {f.name for f in fields(cls)} - {"command"}
        unknown = sorted(set(merged) - known)
        if unknown:
            raise ConfigurationError(
                f"Unknown configuration keys: {', '.join(unknown)}",
                details={"keys": unknown},
            )

        try:
            return cls(command=command, **merged)
        except TypeError as exc:
            raise ConfigurationError(f"Invalid configuration: {exc}") from exc

    @property
    def effective_d(self) -> Optional[float]:
        """d from --d, or pi/K from --d-pi-over K, or None."""
        if self.d_pi_over is not None:
            return math.pi / self.d_pi_over
        return self.d

    def validate(self) -> RunConfig:
        """
        Check every field against its parameter domain.

        Returns:
            Self, with numeric fields coerced

        Raises:
            ParameterDomainError: On any out-of-domain value
            ConfigurationError: On inconsistent flag combinations
        """
        if self.command not in COMMANDS:
            raise ConfigurationError(f"Unknown command '{self.command}'")
        if self.transform not in TRANSFORMS:
            raise ConfigurationError(
                f"transform must be one of {', '.join(TRANSFORMS)}",
                details={"value": self.transform},
            )

        if self.alpha is not None:
            self.alpha = validate_alpha(self.alpha)
        elif self.command != "figure":
            raise ConfigurationError("--alpha is required")

        self.r = validate_open_interval(self.r, 0.0, 1.0, "r")
        if self.cg_tol is not None:
            self.cg_tol = validate_positive(self.cg_tol, "cg_tol")
        if self.spectrum_lower_bound is not None:
            self.spectrum_lower_bound = validate_positive(
                self.spectrum_lower_bound, "spectrum_lower_bound"
            )

        if self.n is not None:
            self.n = validate_integer(self.n, min_value=1, field_name="n")
        if self.h is not None:
            self.h = validate_positive(self.h, "h")
            if self.transform != "se":
                raise ConfigurationError("--h is only available for the SE transform")

        if self.command in ("nodes", "scalar", "operator"):
            if (self.n is None) == (self.h is None):
                raise ConfigurationError("exactly one of --n / --h must be given")
        if self.command == "estimate" and self.n is None:
            raise ConfigurationError("--n is required for estimates")

        if self.d is not None and self.d_pi_over is not None:
            raise ConfigurationError("--d and --d-pi-over are mutually exclusive")
        if self.d_pi_over is not None:
            self.d_pi_over = validate_integer(self.d_pi_over, min_value=2, field_name="d_pi_over")
        d = self.effective_d
        if d is not None:
            if self.transform == "se":
                validate_half_open_interval(d, 0.0, math.pi / 2, "d")
            else:
                validate_open_interval(d, 0.0, math.pi / 2, "d")

        if self.tau is not None:
            self.tau = validate_at_least(self.tau, 1.0, "tau")
        self.lambdas = tuple(validate_spectral_point(lam) for lam in self.lambdas)

        if self.command == "scalar" and not self.lambdas:
            raise ConfigurationError("--lambda is required for the scalar command")
        if self.command == "estimate":
            if self.kind not in ESTIMATE_KINDS:
                raise ConfigurationError(
                    f"--kind must be one of {', '.join(ESTIMATE_KINDS)}",
                    details={"value": self.kind},
                )
            if self.kind in ("ere", "ere2") and len(self.lambdas) != 1:
                raise ConfigurationError("--kind ere/ere2 needs exactly one --lambda")
        if self.command == "operator":
            if self.artificial == (self.matrix is not None):
                raise ConfigurationError("give exactly one of --matrix / --artificial")
            if self.solver is not None and self.solver not in SOLVERS:
                raise ConfigurationError(
                    f"--solver must be one of {', '.join(SOLVERS)}",
                    details={"value": self.solver},
                )
            if self.artificial and self.solver not in (None, "diag"):
                raise ConfigurationError("the artificial operator only supports --solver diag")
            if self.diag_exact and not self.artificial and self.solver != "diag":
                raise ConfigurationError("--diag-exact needs a diagonal operator")
        if self.command == "figure":
            if self.figure not in FIGURES:
                raise ConfigurationError(
                    "--figure must be one of 1, 2, 3, 4",
                    details={"value": self.figure},
                )

        return self


def parse_lambda_list(value: Any) -> tuple[float, ...]:
    """
    Parse ``--lambda`` input: "1,10,1e8", a number, or a JSON list.

    Raises:
        ParameterDomainError: If an entry is not a number
    """
    if isinstance(value, (int, float)):
        items: list[Any] = [value]
    elif isinstance(value, str):
        items = [part for part in value.split(",") if part.strip()]
    else:
        items = list(value)

    parsed = []
    for item in items:
        try:
            parsed.append(float(item))
        except (TypeError, ValueError) as exc:
            raise ParameterDomainError(
                "lambda entries must be numbers",
                field="lambda",
                value=item,
            ) from exc
    return tuple(parsed)


def load_config_file(path: str) -> dict[str, Any]:
    """
    Read a JSON run configuration.

    Raises:
        InputFileError: If the file cannot be read or parsed
        ConfigurationError: If the top level is not an object
    """
    config_path = Path(path)
    try:
        payload = json.loads(config_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputFileError(f"Cannot read config file: {exc}", path=str(config_path)) from exc
    except json.JSONDecodeError as exc:
        raise InputFileError(f"Config file is not valid JSON: {exc}", path=str(config_path)) from exc

    if not isinstance(payload, dict):
        raise ConfigurationError("Config file must contain a JSON object")

    logger.debug("Loaded config file %s with keys %s", config_path, sorted(payload))
    return {key.replace("-", "_"): value for key, value in payload.items()}
