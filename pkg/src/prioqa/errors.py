"""Exception hierarchy.

Everything raised on purpose by the package derives from ``PrioQAError``.
``InputError`` covers problems with user-supplied data (the CLI maps it to
exit status 1); the remaining classes signal search limits or internal
invariant breaches.
"""

from __future__ import annotations


class PrioQAError(Exception):
    """Base class for all package errors."""


class InputError(PrioQAError):
    """Malformed or semantically invalid input."""


# -- parsing ---------------------------------------------------------------


class FactSyntaxError(InputError):
    def __init__(self, message: str, line: int, col: int, source: str | None = None):
        self.line = line
        self.col = col
        self.source = source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{col}: {message}")


class UnknownPredicate(FactSyntaxError):
    pass


class ArityError(FactSyntaxError):
    pass


# -- validation ------------------------------------------------------------


class ValidationError(InputError):
    """A violated instance invariant; ``report`` holds the full picture."""

    def __init__(self, message: str, ids: tuple = (), report=None):
        self.ids = ids
        self.report = report
        super().__init__(message)


class CyclicPriority(ValidationError):
    pass


class PrefNotCoConflicting(ValidationError):
    pass


class NonMinimalConflict(ValidationError):
    pass


class InconsistentCause(ValidationError):
    pass


class EmptyCause(ValidationError):
    pass


class DanglingCauseFact(ValidationError):
    pass


# -- engine ----------------------------------------------------------------


class ModeMismatch(PrioQAError):
    """Reachability mode not applicable to the instance or semantics."""


class InvalidCombination(PrioQAError):
    """Requested encoding options cannot be combined."""


class SearchBudgetExceeded(PrioQAError):
    def __init__(self, budget: int):
        self.budget = budget
        super().__init__(f"search budget of {budget} nodes exhausted")


class InternalInconsistency(PrioQAError):
    """The grounded fixpoint contains a conflict."""


class ParamError(InputError):
    pass


class OracleTooLarge(PrioQAError):
    pass
