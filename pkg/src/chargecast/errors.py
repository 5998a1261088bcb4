"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: user errors exit 1, numerical
failures exit 2.
"""


class ChargecastError(Exception):
    """Base class for all package-specific errors."""


class UserInputError(ChargecastError):
    """Bad arguments, malformed files, or inconsistent configuration."""


class NumericalError(ChargecastError):
    """A numerical routine failed to converge or produced an invalid result."""
