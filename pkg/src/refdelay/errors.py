"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the set on which an operation is defined."""


class PreconditionError(ValueError):
    """Inputs are individually valid but violate an operation's requirements."""


class GenerationError(RuntimeError):
    """A random driver could not be generated exactly."""


class NumericError(ArithmeticError):
    """A computation produced a non-finite value."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell
