class DomainError(ValueError):
    """Input outside the mathematical domain of an operation (q <= 0, n > max_n, ...)."""


class ResourceLimitError(RuntimeError):
    """A requested size exceeds the configured computation or enumeration limits."""
