"""Typed errors raised by the lab.

Library code raises these; only the command-line layer turns them into exit
codes. All derive from ``ValueError`` so callers that only guard against bad
input keep working.
"""

from typing import Optional


class TodaLabError(ValueError):
    """Base class for every error raised by the lab."""


class AlgebraError(TodaLabError):
    """Invalid index or weight in the sl3 weight-space layer."""


class SymbolicError(TodaLabError):
    """Misuse of the rational-function layer (unknown variable, bad Laurent request)."""


class WickError(TodaLabError):
    """A Wick expansion needs a covariance entry that was not supplied."""


class NeutralityError(TodaLabError):
    """Free-field evaluation requested on a configuration with a nonzero charge deficit."""


class SeibergError(TodaLabError):
    """A Seiberg bound is violated.

    Args:
        inequality: Human-readable statement of the violated bound
    """

    def __init__(self, inequality: str):
        self.inequality = inequality
        super().__init__(f"{inequality} violates Seiberg")


class NumericError(TodaLabError):
    """Numerical failure: factorization beyond the jitter cap, tail bound too large, noisy fit."""


class ConfigError(TodaLabError):
    """Invalid run configuration.

    Args:
        message: What is wrong
        line: Line of a JSON parse error, if any
        column: Column of a JSON parse error, if any
    """

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
