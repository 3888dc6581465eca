"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class GcdTensorError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(GcdTensorError, ValueError):
    """Invalid input: wrong shape, duplicate elements, unknown flag, etc."""


class DomainError(GcdTensorError, ValueError):
    """A scalar function is undefined on some entry (e.g. 0 ** -1)."""


class ClosureError(UsageError):
    """A set is not factor-, gcd- or meet-closed where closure is required."""

    def __init__(self, message, missing=None):
        super().__init__(message)
        self.missing = missing


class LatticeError(UsageError):
    """A relation is not a partial order, or some pair has no unique meet."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class UnsupportedError(GcdTensorError):
    """The requested (order, dimension) regime has no implemented oracle."""
