"""Exception types shared across the package."""


class InvalidExponentError(ValueError):
    """Exponent outside [1, inf]."""


class NotCoveredError(ValueError):
    """Parameter tuple outside the range of any closed-form estimate."""


class DimensionMismatchError(ValueError):
    """Vector length does not match the ambient dimension of a body."""


class EnumerationCapError(RuntimeError):
    """A vertex/candidate enumeration would exceed the configured cap."""
