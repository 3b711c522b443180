"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when an operation receives arguments outside its contract."""


class ConfigurationError(ValueError):
    """Raised when a problem, network, or experiment setup is invalid."""


class FeasibilityError(RuntimeError):
    """Raised when a feasibility restoration step fails to converge."""
