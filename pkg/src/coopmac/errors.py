"""Exception hierarchy.

The CLI maps these to exit codes: validation problems in the input are
``2``, unsupported requests are ``3``, failed numerical checks are ``4``.
"""


class CoopMacError(Exception):
    """Base class for all package errors."""


class ValidationError(CoopMacError, ValueError):
    """An input object violates its documented invariants."""


class CapabilityError(CoopMacError):
    """The request is well formed but outside what the routine supports."""


class NumericalError(CoopMacError, ArithmeticError):
    """A computed quantity is non-finite or fails a consistency check."""


class BudgetError(CapabilityError):
    """An enumeration or allocation would exceed its configured budget."""

    def __init__(self, message: str, count: int):
        super().__init__(message)
        self.count = count
