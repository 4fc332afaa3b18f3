"""Exception types shared across the package.

DomainError covers mathematically invalid inputs (wrong field, degenerate
map, exceptional seed point).  ConvergenceError covers numerical failure
after an iteration cap; it carries whatever partial data was computed so
callers can inspect it.  MapSpecError is a parse failure and carries the
offending position in the input string.
"""
from __future__ import annotations


class DomainError(ValueError):
    """Input is outside the mathematical domain of the operation."""


class FieldMismatchError(DomainError):
    """Two operands live in different coefficient fields."""


class ConvergenceError(RuntimeError):
    """An iterative method hit its budget before reaching the target.

    Attributes
    ----------
    partial : object or None
        Best value available when the budget ran out.
    residuals : object or None
        Diagnostic residuals, when the method has them.
    """

    def __init__(self, message, partial=None, residuals=None):
        super().__init__(message)
        self.partial = partial
        self.residuals = residuals


class IterationBudgetError(ConvergenceError):
    """Iteration budget exceeded before the requested error bound."""


class MapSpecError(ValueError):
    """A map or coefficient string failed to parse.

    Attributes
    ----------
    position : int or None
        Index into the original string where parsing failed.
    """

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position
