"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "HawkesflowError",
    "ParseError",
    "StabilityError",
    "SolverError",
]


class HawkesflowError(Exception):
    """Base class for all package-specific errors."""


class ParseError(HawkesflowError):
    """Raised when an input file cannot be parsed.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class StabilityError(HawkesflowError):
    """Raised when a model violates the stationarity condition."""


class SolverError(HawkesflowError):
    """Raised when the kernel solve cannot produce a trustworthy result.

    ``diagnostics`` holds whatever was measured before the abort
    (condition estimate, matrix size, ...).
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
