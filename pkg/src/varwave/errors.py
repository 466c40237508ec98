"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the range an operation is defined on."""


class SolveError(RuntimeError):
    """A numerical solve failed to converge or produced invalid state."""


class ConfigError(ValueError):
    """A configuration file is malformed or inconsistent."""
