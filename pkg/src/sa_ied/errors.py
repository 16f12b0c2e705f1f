"""Exception types shared across the package."""


class UsageError(ValueError):
    """Bad arguments or malformed input (CLI exit code 1)."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class ConstructionError(RuntimeError):
    """A random construction exhausted its retry budget."""


class ResourceError(RuntimeError):
    """An enumeration would exceed its configured budget."""
