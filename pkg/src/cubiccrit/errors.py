"""Exception types shared by the package."""


class DomainError(ValueError):
    """Parameter outside the supported domain."""


class ContinuationError(RuntimeError):
    """Root continuation could not resolve the labeling."""


class TopologyError(ValueError):
    """Inconsistent sheet or cut bookkeeping."""


class GeometryError(RuntimeError):
    """A traced curve does not have the expected shape."""


class QuadratureError(RuntimeError):
    """A width or measure quadrature could not be completed."""
