"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input violates a documented invariant or precondition."""


class DimensionCapError(ValidationError):
    """A computation would exceed the configured dimension cap."""
