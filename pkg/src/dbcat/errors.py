"""Exception hierarchy.

Every failure the library can report deliberately carries a stable ``code``
string; the command-line front end prints ``ERROR <code>: <message>`` and
exits 1, so the codes are part of the public contract and never change.
"""

from __future__ import annotations

__all__ = [
    "DbError",
    "ArityMismatch",
    "DuplicateRelation",
    "ConstantOutsideDomain",
    "ParseError",
    "UnknownRelation",
    "IndexOutOfRange",
    "UnionArityMismatch",
    "BoundTooSmall",
    "ResourceLimit",
    "ResultNotInTarget",
    "EndpointMismatch",
    "BoundMismatch",
    "FluxViewNotExpressible",
    "SquareNotCommuting",
    "TargetNotClosed",
    "NotRewritable",
    "WitnessNotFound",
    "CyclicSystem",
    "DuplicateVariable",
    "UndeclaredVariable",
    "BareVariableRHS",
    "CrossComponentTerm",
    "IoError",
]


class DbError(Exception):
    """Base class for all domain errors raised by this package."""

    code = "Error"


class ArityMismatch(DbError):
    """A tuple's length disagrees with the arity it was declared under."""

    code = "ArityMismatch"


class DuplicateRelation(DbError):
    code = "DuplicateRelation"


class ConstantOutsideDomain(DbError):
    code = "ConstantOutsideDomain"


class ParseError(DbError):
    """Syntax error in a term, instance file, mapping file, or equation file.

    ``line`` and ``column`` are 1-based positions into the parsed text when
    known (0 when the error is not tied to a position).
    """

    code = "SyntaxError"

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        if line:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class UnknownRelation(DbError):
    code = "UnknownRelation"


class IndexOutOfRange(DbError):
    code = "IndexOutOfRange"


class UnionArityMismatch(DbError):
    code = "UnionArityMismatch"


class BoundTooSmall(DbError):
    """The requested arity bound cannot accommodate the input."""

    code = "BoundTooSmall"


class ResourceLimit(DbError):
    """A saturation exceeded the configured view-count ceiling."""

    code = "ResourceLimit"


class ResultNotInTarget(DbError):
    """A mapping's result view is not among the target instance's views."""

    code = "ResultNotInTarget"


class EndpointMismatch(DbError):
    """Two arrows were combined but their endpoints do not line up."""

    code = "EndpointMismatch"


class BoundMismatch(DbError):
    """Arrows computed at different closure bounds were mixed."""

    code = "BoundMismatch"


class FluxViewNotExpressible(DbError):
    code = "FluxViewNotExpressible"


class SquareNotCommuting(DbError):
    code = "SquareNotCommuting"


class TargetNotClosed(DbError):
    """The target of a closed-target arrow is not extensionally closed."""

    code = "TargetNotClosed"


class NotRewritable(DbError):
    """The query's value does not flow through the given mapping."""

    code = "NotRewritable"


class WitnessNotFound(DbError):
    """The value flows through, but no witness exists at the given bound."""

    code = "WitnessNotFound"


class CyclicSystem(DbError):
    """An equation system has a dependency cycle."""

    code = "CyclicSystem"


class DuplicateVariable(DbError):
    code = "DuplicateVariable"


class UndeclaredVariable(DbError):
    code = "UndeclaredVariable"


class BareVariableRHS(DbError):
    """An equation's right-hand side is a bare variable, which is not allowed."""

    code = "BareVariableRHS"


class CrossComponentTerm(DbError):
    """A term or operation reaches across components of a partitioned instance."""

    code = "CrossComponentTerm"


class IoError(DbError):
    """A file could not be read or written."""

    code = "IoError"
