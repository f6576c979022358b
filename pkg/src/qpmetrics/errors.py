"""Exception taxonomy shared across the package.

Every exception raised on a documented failure path derives from
:class:`QpmError`, so callers can catch the package's errors with a
single ``except`` clause while still distinguishing the failure kind.
"""

from __future__ import annotations


class QpmError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(QpmError):
    """Operands have incompatible shapes, dimensions or outcome spaces."""


class InvariantViolationError(QpmError):
    """A structural invariant of the input object does not hold."""


class NotPSDError(InvariantViolationError):
    """A matrix required to be positive semidefinite is not (beyond tolerance)."""


class InvalidArgumentError(QpmError):
    """A scalar or configuration argument is outside its admissible range."""


class EmptyInputError(QpmError):
    """An operand that must be nonempty is empty."""


class ParseError(QpmError):
    """An instance file is not syntactically or structurally well formed."""

    def __init__(self, message: str, *, line: int | None = None, column: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class SchemaVersionError(ParseError):
    """An instance file declares an unsupported schema version."""

    def __init__(self, message: str):
        super().__init__(message)
