"""Exception hierarchy shared across the toolkit.

Parse-time errors carry a source span so the CLI can print caret
diagnostics; everything else is a plain message.
"""
from __future__ import annotations


class QdbError(Exception):
    """Base class for all toolkit errors."""


# --- source-level errors (lexer / parser / elaborator) -----------------------

class SourceError(QdbError):
    """Error anchored to a location in QASM source."""

    def __init__(self, message: str, span=None):
        super().__init__(message)
        self.span = span


class LexError(SourceError):
    pass


class ParseError(SourceError):
    pass


class UnsupportedVersion(ParseError):
    pass


class IncludeNotFound(SourceError):
    pass


class CyclicInclude(SourceError):
    pass


class SemanticError(SourceError):
    pass


class UndeclaredGate(SemanticError):
    pass


# --- state / linear algebra ---------------------------------------------------

class IndexOutOfRange(QdbError):
    pass


class SameQubit(QdbError):
    pass


class DimensionMismatch(QdbError):
    pass


class EmptyKeepSet(QdbError):
    pass


class CapacityExceeded(QdbError):
    pass


class DegenerateNorm(QdbError):
    """A measurement branch with vanishing probability was selected.

    Cannot happen with correct Born sampling; signals kernel corruption.
    """


# --- execution ----------------------------------------------------------------

class NonUnitaryProgram(QdbError):
    pass


class CursorExhausted(QdbError):
    pass


class KernelCorruption(QdbError):
    """State norm drifted beyond tolerance during execution."""


# --- debugger -------------------------------------------------------------------

class UnresolvableLocation(QdbError):
    pass


class NonUnitaryPrefix(QdbError):
    pass


class UnknownInput(QdbError):
    """Superposition check requested for an unknown input state.

    There is no known general algorithm for this case; the toolkit refuses
    rather than guessing.
    """


class MixedGlobalState(QdbError):
    pass


class RegisterOverlap(QdbError):
    pass


class BlankNotZero(QdbError):
    pass


class MixedSource(QdbError):
    pass


class TooManyQubits(QdbError):
    pass


class NonUnitaryPreparation(QdbError):
    pass


class BudgetExhausted(QdbError):
    pass


# --- test harness ----------------------------------------------------------------

class OutOfRange(QdbError):
    pass


class EmptyObservation(QdbError):
    pass


class SuiteParseError(QdbError):
    def __init__(self, message: str, location: str | None = None):
        super().__init__(message if location is None else f"{location}: {message}")
        self.location = location
