#!/usr/bin/env python3
"""
Logging helpers for the Toda Ward Lab.

The symbolic and Monte Carlo suites share one record format. Long runs can
send everything to a file and keep the console for result summaries.
"""

import logging
from typing import Optional

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """
    Configure the root logger for a lab run.

    Args:
        level (str): 'DEBUG', 'INFO', 'WARNING' or 'ERROR'. Unknown names fall back to 'INFO'.
        log_file (str, optional): Write records to this file (truncated) instead of stderr.
    """
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        numeric = logging.INFO
    handlers = [logging.FileHandler(log_file, mode='w')] if log_file else None
    logging.basicConfig(level=numeric, format=LOG_FORMAT, handlers=handlers, force=log_file is not None)
    # basicConfig keeps existing handlers, so the level is set explicitly
    logging.getLogger().setLevel(numeric)
    logging.getLogger(__name__).debug(f"Logging configured with level {logging.getLevelName(numeric)}")


def get_logger(name: str) -> logging.Logger:
    """Logger for a lab module (pass ``__name__``)."""
    return logging.getLogger(name)
