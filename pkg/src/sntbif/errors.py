"""Exception taxonomy shared across the package.

UsageError maps to CLI exit code 2, NumericalError to exit code 3.
"""


class SntbifError(Exception):
    """Base class for all package errors."""


class UsageError(SntbifError, ValueError):
    """Caller violated a precondition (bad dimension, bad flag, ...)."""


class DegenerateModelError(UsageError):
    """A model-coefficient guard failed (e.g. a11 = 0 for MLV equilibria)."""


class OutOfDomainError(UsageError):
    """A closed form was evaluated outside its domain of validity."""


class NumericalError(SntbifError, RuntimeError):
    """A numerical procedure failed to converge or broke down."""
