"""
Logging utilities for lowzero.

Results go to stdout, so the package logger writes to stderr only.
"""

import logging
import sys
from typing import Optional

_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Create a logger for the package
_logger = logging.getLogger("lowzero")
_logger.setLevel(logging.WARNING)
_logger.propagate = False


def setup_logger(level: Optional[str] = None) -> logging.Logger:
    """
    Set up and configure the main logger for lowzero.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)

    Returns:
        Configured logger instance
    """
    if level:
        _logger.setLevel(getattr(logging, level.upper()))

    if not _logger.handlers:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(
            logging.Formatter(_FORMAT, datefmt="%Y-%m-%d %H:%M:%S")
        )
        _logger.addHandler(console_handler)

    return _logger


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """
    Get a logger for a specific module.

    Args:
        name: Name of the module (optional). A leading ``lowzero.`` is
            accepted so ``get_logger(__name__)`` works.

    Returns:
        Logger instance
    """
    if name:
        if name.startswith("lowzero."):
            name = name[len("lowzero."):]
        return logging.getLogger(f"lowzero.{name}")
    return _logger
