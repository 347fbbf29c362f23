"""
Logging configuration for fracpow.

All log output goes to stderr; stdout is reserved for CSV and text results.
"""

from __future__ import annotations

import logging
import sys
from typing import Optional

from .config import RuntimeSettings

LOG_FORMAT = "[%(asctime)s] [%(levelname)s] %(name)s: %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

_HANDLER_NAME = "fracpow-stderr"


def configure_logging(settings: Optional[RuntimeSettings] = None) -> logging.Logger:
    """
    Configure package-wide logging with a structured format.

    Sets up:
    - One stderr stream handler (repeat calls do not add duplicates)
    - INFO level, DEBUG when FRACPOW_DEBUG is set, or FRACPOW_LOG_LEVEL

    Args:
        settings: Runtime settings; loaded from the environment when omitted

    Returns:
        The configured package logger
    """
    settings = settings or RuntimeSettings.from_env()

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    package_logger = logging.getLogger("fracpow")
    package_logger.setLevel(settings.level)
    package_logger.propagate = False

    handler = next(
        (h for h in package_logger.handlers if h.get_name() == _HANDLER_NAME),
        None,
    )
    if handler is None:
        handler = logging.StreamHandler(sys.stderr)
        handler.set_name(_HANDLER_NAME)
        package_logger.addHandler(handler)
    else:
        handler.stream = sys.stderr
    handler.setFormatter(formatter)

    package_logger.debug(
        "Logging configured | level=%s threads=%d",
        logging.getLevelName(settings.level),
        settings.threads,
    )
    return package_logger
