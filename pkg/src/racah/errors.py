"""Exception hierarchy shared by every module of the package."""


class RacahError(Exception):
    """Base class for all package errors."""


class ConstraintViolation(RacahError, ValueError):
    """A parameter tuple lies outside the admissible set."""


class NonIntegerSize(RacahError, ValueError):
    """``b - a`` is not an integer."""


class DomainError(RacahError, ValueError):
    """An argument lies outside the domain of a function."""


class RacahOverflowError(RacahError, OverflowError):
    """A quantity does not fit in double precision; use the log variant."""


class NumericalBreakdown(RacahError, ArithmeticError):
    """A recurrence produced an invalid value (negative radicand, NaN, Inf)."""

    def __init__(self, message, n=None, x=None):
        if n is not None or x is not None:
            message = f"{message} (n={n}, x={x})"
        super().__init__(message)
        self.n = n
        self.x = x


class PoleError(RacahError, ZeroDivisionError):
    """A denominator Pochhammer factor vanished before the series terminated."""


class SizeLimit(RacahError, ValueError):
    """The requested size exceeds the guard for an expensive operation."""


class NonIntegerBeta(RacahError, ValueError):
    """Daoui's initial-value recurrence requires an integer beta."""


class DegenerateRow(RacahError, ArithmeticError):
    """A row became numerically dependent on the previous rows."""


class DimensionMismatch(RacahError, ValueError):
    """Array shapes do not agree."""


class ZeroSignal(RacahError, ValueError):
    """The reference signal is identically zero."""


class TimeBudgetExceeded(RacahError, RuntimeError):
    """A trial ran longer than its time budget."""


class FormatError(RacahError, ValueError):
    """A matrix or image file is malformed."""
