"""
Logger Utility Module

Loguru setup for the toolkit. Console output goes to stderr so that CLI
results on stdout stay machine-readable; solver runs in worker processes
import this module and get the same sinks.
"""

import sys
from typing import Optional

from loguru import logger
from app.config import get_settings

CONSOLE_FORMAT = (
    "<green>{time:HH:mm:ss.SSS}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)


def setup_logger(level: Optional[str] = None):
    """
    Configure the logger.

    Args:
        level: Console level overriding EVSP_LOG_LEVEL

    Sets up:
    - Console output with colors on stderr
    - Rotating file output when debug mode is off and a log file is set
    """
    settings = get_settings()
    logger.remove()

    logger.add(sys.stderr, colorize=True, format=CONSOLE_FORMAT, level=(level or settings.log_level).upper())

    if not settings.debug and settings.log_file:
        logger.add(
            settings.log_file,
            rotation="10 MB",
            retention="7 days",
            compression="zip",
            level="INFO"
        )

    return logger


try:
    setup_logger()
except Exception:
    # settings unreadable; loguru's default sink stays
    pass


__all__ = ["logger", "setup_logger"]
