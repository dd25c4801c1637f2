class QRMError(Exception):
    """Base class for every error raised by the solver package."""


class DimensionError(QRMError, ValueError):
    """Shapes of the unknown, the operator and the data do not agree."""


class ArgumentError(QRMError, ValueError):
    """A scalar argument is outside its valid range."""


class DegenerateIterateError(QRMError, ArithmeticError):
    """H(u) vanished, so the subgradient q and the 1/H(u) weight are undefined."""


class NumericError(QRMError, ArithmeticError):
    """A factorization failed or a matrix turned out rank deficient."""
