"""Exception types raised across the package."""


class BracketSumsError(Exception):
    """Base class for all errors raised by this package."""


class RationalSqrt(BracketSumsError, ValueError):
    """The square root of k is rational, so k has no irrational field."""


class PrecisionTooLow(BracketSumsError, ValueError):
    pass


class ContextMismatch(BracketSumsError, ValueError):
    """Two objects built from different quadratic fields were combined."""


class EnumerationCapExceeded(BracketSumsError, RuntimeError):
    pass


class ArithmeticOverflow(BracketSumsError, OverflowError):
    """An exact integer intermediate would leave the supported range."""


class EmptyInterval(BracketSumsError, ValueError):
    pass


class BudgetExceeded(BracketSumsError, RuntimeError):
    """The requested computation is larger than the configured budget."""


class AmbiguousClassification(BracketSumsError, RuntimeError):
    """A frequency sits in the widened arcs of two distinct centers."""


class EquivalenceViolation(BracketSumsError, ArithmeticError):
    pass


class IndexOutOfRange(BracketSumsError, IndexError):
    pass


class GridTooSmall(BracketSumsError, ValueError):
    pass
