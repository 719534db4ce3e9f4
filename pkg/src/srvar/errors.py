"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when user-supplied data or configuration is inconsistent."""


class NumericalError(RuntimeError):
    """Raised when a factorization or other numerical step fails."""
