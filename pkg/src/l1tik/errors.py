"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A configuration value violates a documented constraint."""


class NumericalError(RuntimeError):
    """An iteration produced non-finite values or a linear solve broke down."""
