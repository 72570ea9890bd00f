"""Exception hierarchy for dp-byoa."""

from typing import Any, Optional

import numpy as np


class DpByoaError(Exception):
    """Base exception for dp-byoa errors."""
    pass


class ArgumentError(DpByoaError, ValueError):
    """A precondition on an argument was violated."""
    pass


class RoutingError(ArgumentError):
    """A problem was sent to an algorithm whose preconditions it does not meet."""
    pass


class NotSupportedError(DpByoaError):
    """The problem family has no exact oracle or closed form for the request."""
    pass


class OracleError(DpByoaError):
    """An exact oracle failed its own residual check."""
    pass


class LedgerViolationError(DpByoaError):
    """Entries declared as parallel composition touch overlapping partitions."""
    pass


class ConfigError(DpByoaError):
    """An experiment configuration could not be parsed or validated."""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.message = message
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(f"{prefix}{message}")


class BudgetExceededError(DpByoaError):
    """A base solver ran out of gradient evaluations before reaching its target."""

    def __init__(
        self,
        message: str,
        best_point: np.ndarray,
        gradient_evals: int,
        best_certificate: float,
        best_dual: Optional[np.ndarray] = None,
    ):
        super().__init__(message)
        self.best_point = best_point
        self.best_dual = best_dual
        self.gradient_evals = gradient_evals
        self.best_certificate = best_certificate


class PhaseFailedError(DpByoaError):
    """A DP meta-algorithm stopped because one of its base-solver calls failed."""

    def __init__(self, message: str, partial_trace: list[Any]):
        super().__init__(message)
        self.partial_trace = partial_trace
