"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """A resource (table bound, memory cap, grid) is insufficient for the request."""


class RangeError(ValueError):
    """A query falls outside the range covered by precomputed data."""


class OverflowGuardError(OverflowError):
    """A value would leave the supported 64-bit range."""


class CapabilityError(RuntimeError):
    """The requested artifact cannot be produced under the current configuration."""
