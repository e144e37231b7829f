"""Exception hierarchy shared by every module."""


class QSeriesError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(QSeriesError, ValueError):
    """Argument outside the domain of the function (q out of range, x=0, ...)."""


class BranchError(DomainError):
    """Argument lies on the branch cut of a multivalued power."""


class PoleError(DomainError):
    """Evaluation point coincides with a pole."""


class ConvergenceError(QSeriesError, ArithmeticError):
    """The series does not converge at the requested point."""


class TruncationExhausted(ConvergenceError):
    """``max_terms`` was reached before the stopping rule fired."""


class OverflowGuard(QSeriesError, OverflowError):
    """Coefficient growth would exceed the configured magnitude bound."""


class ShapeError(QSeriesError, ValueError):
    """An operator does not have the structure an algorithm requires."""
