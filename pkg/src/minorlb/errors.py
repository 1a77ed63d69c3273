"""Exception types shared across the package."""


class GraphFormatError(ValueError):
    """Malformed graph or decomposition text."""


class DisconnectedGraphError(ValueError):
    """Raised when a metric is requested for a disconnected graph."""


class ResourceCeilingError(RuntimeError):
    """A configured size or search-state ceiling would be exceeded."""
