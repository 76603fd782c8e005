"""Custom exceptions for uncertain fixed-effects analysis."""

from __future__ import annotations

from typing import Optional


class UFEError(Exception):
    """Base class for analysis errors."""


class InvalidInputError(UFEError, ValueError):
    """Raised when a scalar or sample argument is outside its domain."""


class SchemaError(UFEError):
    """Raised when a CSV stream does not match the expected layout."""

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateGroupError(UFEError):
    """Raised when a group or cell cannot support a test (too few points, zero scale)."""

    def __init__(self, group: str, reason: str) -> None:
        self.group = group
        self.reason = reason
        super().__init__(f"group {group}: {reason}")


class SequencingError(UFEError):
    """Raised when a test runs before the validation it depends on."""


class WrongPathError(UFEError):
    """Raised when the balanced closed form is asked to fit unbalanced data."""


class SolverError(UFEError):
    """Raised when a numerical cross-check of the constrained solve fails."""


class InfeasibleConstraintsError(SolverError):
    """Raised when the equality constraints cannot be met by any coefficient vector."""

    def __init__(self, residual: float, tolerance: float) -> None:
        self.residual = residual
        self.tolerance = tolerance
        message = (
            "Constraints are infeasible.\n"
            f"Max |C beta - d|: {residual:.3e}\n"
            f"Tolerance: {tolerance:.3e}\n"
            "Options:\n"
            "1. Check that the right-hand side d lies in the range of C.\n"
            "2. Remove contradictory constraint rows.\n"
        )
        super().__init__(message)
