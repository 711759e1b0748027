"""
Exception hierarchy shared by every module.

Library code raises these; the command line maps them onto exit codes.
Verification routines do not raise on a failed check, they report it.
"""

from typing import Optional


class ForcingToolError(Exception):
    """Base class for all errors raised by this project."""


class FieldMismatchError(ForcingToolError, TypeError):
    """Operands (or matrix entries) belong to different field instances."""


class FieldArithmeticError(ForcingToolError, ZeroDivisionError):
    """Division by zero or a missing inverse inside a field."""


class GraphConstructionError(ForcingToolError, ValueError):
    """A graph could not be built: not bipartite, duplicate labels, bad parameters."""


class PreconditionError(ForcingToolError, ValueError):
    """An operation was called outside of its documented preconditions."""


class SupportMismatchError(ForcingToolError, ValueError):
    """The nonzero pattern of a weighted matrix differs from the graph's (bi-)adjacency."""

    def __init__(self, message: str, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class ExpressionParseError(ForcingToolError, ValueError):
    """A family expression, scalar, graph file or certificate document failed to parse."""

    def __init__(self, message: str, position: Optional[int] = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class VerificationError(ForcingToolError):
    """A certificate, identity or invariant that must hold did not."""
