"""Exception hierarchy shared across the package."""

from __future__ import annotations


class ScmError(Exception):
    """Base class for every error raised by this package."""


class UnknownVariableError(ScmError):
    """A referenced variable does not exist in the model or table."""


class CyclicModelError(ScmError):
    """The assignment graph contains a directed cycle."""


class InterventionError(ScmError):
    """An intervention request is malformed (bad variable or value)."""


class NonIntervenableError(InterventionError):
    """The requested variable is marked as not intervenable."""


class EvaluationError(ScmError):
    """Expression evaluation failed (unbound name or bad modulus)."""


class BudgetExceededError(ScmError):
    """The noise space is too large for exact enumeration."""


class UndefinedConditionalError(ScmError):
    """The conditioning event has probability zero."""


class DivergenceUndefinedError(ScmError):
    """KL divergence is infinite: p puts mass where q has none."""


class ProtocolError(ScmError):
    """An intervention protocol does not fit the variable it targets."""


class DslError(ScmError):
    """A problem in model text, carrying a 1-based source position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        super().__init__(message)

    def __str__(self) -> str:
        msg = self.args[0]
        if self.line is not None and self.column is not None:
            return f"{self.line}:{self.column}: {msg}"
        if self.line is not None:
            return f"{self.line}: {msg}"
        return msg


class ModelValidationError(ScmError):
    """Text parsed cleanly but the bound model violates an invariant.

    ``violations`` holds the :class:`~scmkit.core.Violation` records from
    the structural check, with source lines attached where known.
    """

    def __init__(self, violations):
        self.violations = tuple(violations)
        super().__init__("; ".join(v.message for v in self.violations))
