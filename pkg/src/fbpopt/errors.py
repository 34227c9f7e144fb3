"""
Domain Exceptions

Every exception subclasses the builtin a caller would already catch, so code
written against ``ValueError``/``RuntimeError`` keeps working.  The CLI maps
them to exit codes (see :mod:`fbpopt.cli`).
"""

from __future__ import annotations

from typing import Any, List, Optional


class DegenerateGeometryError(ValueError):
    """Raised when ``1 + gamma <= 0`` at an evaluation point."""


class SingularSystemError(RuntimeError):
    """Raised when a sparse factorization fails or returns non-finite values."""


class ThresholdRangeError(ValueError):
    """Raised when theta_1 or theta_2 leaves its open admissible interval."""


class ConfigError(ValueError):
    """
    Configuration parse or validation failure.

    Attributes:
        violations: Every problem found, one message per entry.
    """

    def __init__(self, violations: List[str] | str) -> None:
        if isinstance(violations, str):
            violations = [violations]
        self.violations: List[str] = list(violations)
        super().__init__("; ".join(self.violations))


class ConvergenceError(RuntimeError):
    """
    An iteration hit its cap before meeting its tolerance.

    Attributes:
        trace:     Partial :class:`~fbpopt.solvers.fixed_point.FixedPointTrace`
                   (or ``None`` for iterations that keep no trace).
        iterate:   Last iterate reached.
    """

    def __init__(
        self,
        message: str,
        trace: Optional[Any] = None,
        iterate: Optional[Any] = None,
    ) -> None:
        super().__init__(message)
        self.trace = trace
        self.iterate = iterate


class ExpressionError(ValueError):
    """
    A data expression failed to parse or evaluates to non-finite values.

    Attributes:
        text:     The offending expression.
        position: Character offset of the problem (``None`` when not local).
    """

    def __init__(self, message: str, text: str = "", position: Optional[int] = None) -> None:
        if position is not None:
            message = f"{message} at position {position} in '{text}'"
        super().__init__(message)
        self.text = text
        self.position = position
