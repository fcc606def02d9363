"""Exception types shared across the package."""


class FgspcaError(Exception):
    """Base class for errors raised by this package."""


class InvalidInputError(FgspcaError, ValueError):
    """Input has the wrong shape, is non-finite, or violates a precondition."""


class NotPSDError(InvalidInputError):
    """A matrix expected to be positive semi-definite has a negative eigenvalue."""


class DataError(FgspcaError):
    """A data file could not be parsed or failed validation."""


class DivergenceError(FgspcaError, ArithmeticError):
    """An iterative solver produced a non-finite iterate."""
