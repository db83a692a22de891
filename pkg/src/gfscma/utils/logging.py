"""Logging configuration."""

import logging
import sys
import time
from functools import wraps
from pathlib import Path
from typing import Callable, Optional, Union

from ..config.settings import LOG_DIR, LOG_LEVEL

LOGGING_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
ROOT_LOGGER = "gfscma"


def _setup_logger(
    name: str,
    format_str: str,
    level: int = logging.INFO,
    log_file: Optional[Path] = None,
) -> logging.Logger:
    """Set up a logger with console and optional file output."""
    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.propagate = False
    logger.handlers.clear()

    formatter = logging.Formatter(format_str)

    # Console handler; stdout stays reserved for results
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


def setup_logging(
    level: Union[int, str, None] = None,
    log_dir: Optional[Path] = None,
) -> logging.Logger:
    """
    Configure the package logger.

    Args:
        level: Logging level name or number (defaults to GFSCMA_LOG_LEVEL)
        log_dir: Directory for ``gfscma.log`` (defaults to GFSCMA_LOG_DIR, if set)

    Returns:
        The configured ``gfscma`` logger
    """
    if level is None:
        level = LOG_LEVEL
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO
    log_dir = log_dir if log_dir is not None else LOG_DIR
    log_file = Path(log_dir) / "gfscma.log" if log_dir is not None else None
    return _setup_logger(ROOT_LOGGER, LOGGING_FORMAT, level, log_file)


def log_execution_time(f: Callable) -> Callable:
    """Decorator to log the wall time of long-running operations."""
    logger = logging.getLogger(f.__module__)

    @wraps(f)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        try:
            result = f(*args, **kwargs)
        except Exception as e:
            logger.error("%s failed after %.3fs: %s", f.__qualname__,
                         time.perf_counter() - start_time, e)
            raise
        logger.info("%s finished in %.3fs", f.__qualname__,
                    time.perf_counter() - start_time)
        return result
    return wrapper
