"""Exception hierarchy for the whole package.

Every error a caller is expected to catch derives from DepositionError.
Subsystems raise the most specific class; the CLI and HTTP layers map
them onto exit codes / status codes.
"""

from __future__ import annotations


class DepositionError(Exception):
    """Base class for all package errors."""


# --- trace / catalog ingestion -------------------------------------------

class CatalogError(DepositionError):
    """Invalid variable catalog (duplicate names, empty enums, ...)."""


class EmptyTrace(DepositionError):
    """A trace log with no records."""


class UnknownVariable(DepositionError):
    """A record or formula references a variable not in the catalog."""


class DomainViolation(DepositionError):
    """A concrete value lies outside its declared domain."""


class NonMonotonicStep(DepositionError):
    """Trace step indices are not 0, 1, 2, ... without gaps."""


class MissingVariable(DepositionError):
    """A state does not cover a requested variable."""


class StepOutOfRange(DepositionError):
    """Trace access outside [0, len)."""


class TraceFormatError(DepositionError):
    """Malformed trace log document."""


# --- decision language -----------------------------------------------------

class LangError(DepositionError):
    """Base for parse/typecheck errors; carries a source position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col


class DeclSyntaxError(LangError):
    """Token-level or grammar-level parse failure."""


class DeclTypeError(LangError):
    """Expression or statement fails the type rules."""


class EnvWriteError(LangError):
    """Assignment to an environment or state (input) variable."""


class UnboundedLoopError(LangError):
    """A while loop without a syntactic iteration bound."""


class BudgetExhausted(DepositionError):
    """An execution (concrete or one symbolic path) exceeded the step budget."""

    def __init__(self, message: str, path_id: int | None = None):
        super().__init__(message)
        self.path_id = path_id


class ArithmeticFault(DepositionError):
    """Integer division by zero (floats follow IEEE and never fault)."""


# --- constraint algebra ------------------------------------------------------

class NotARelaxation(DepositionError):
    """Constraint set is not one single-variable atom per input variable."""


class WrongClass(DepositionError):
    """A constraint or behavior references a variable of the wrong class."""


class FactualOutsideRelaxation(DepositionError):
    """Puncture requested at a state the base relaxation excludes."""


class NotTight(DepositionError):
    """Factual scenario with a non-equality atom (uniqueness unverifiable)."""


class KeyframeMismatch(DepositionError):
    """Factual scenario equalities disagree with the logged keyframe."""


class QueryFormatError(DepositionError):
    """Malformed query document."""


# --- solver boundary --------------------------------------------------------

class SolverUnavailable(DepositionError):
    """No solver executable configured, or it cannot be spawned."""


class SolverCrash(DepositionError):
    """Solver exited nonzero or produced unparseable output."""

    def __init__(self, message: str, transcript: str = ""):
        super().__init__(message)
        self.transcript = transcript


class SolverTimeout(DepositionError):
    """Solver exceeded its wall-clock budget; surfaced as verdict Unknown."""


class UnsupportedOperation(DepositionError):
    """Formula uses an operation the SMT emitter cannot express."""


class DomainTooLarge(DepositionError):
    """Brute-force enumeration would exceed the assignment cap."""


# --- session ----------------------------------------------------------------

class NoWitness(DepositionError):
    """Basis derivation requested from a fact without a witness model."""


class SchemaVersionMismatch(DepositionError):
    """Session file written by an incompatible schema version."""


class CorruptFile(DepositionError):
    """Session file is not valid JSON or misses required fields."""
