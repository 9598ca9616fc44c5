"""Shared exception types."""


class ValidationError(ValueError):
    """Raised when an input violates a documented contract."""
