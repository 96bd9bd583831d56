"""Exception types shared across the package."""


class BuresError(Exception):
    """Base class for all errors raised by bureshall."""


class DomainError(BuresError, ValueError):
    """Argument outside the domain of a function (e.g. log-gamma at x <= 0)."""


class ParameterError(BuresError, ValueError):
    """Invalid or unsupported ensemble / kernel parameters."""


class ConvergenceError(BuresError, ArithmeticError):
    """A series or quadrature failed to reach its tolerance within its budget."""
