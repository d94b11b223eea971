"""Exception types shared across the package."""


class ConfigError(Exception):
    """A scenario configuration file or value is invalid."""


class NumericalGuardError(RuntimeError):
    """A numerical routine could not certify its own accuracy."""
