"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration input."""


class GeometryError(ValueError):
    """Degenerate or out-of-domain geometric quantity."""


class EstimatorError(ValueError):
    """Statistical estimator called with insufficient or degenerate data."""


class DegenerateChannelError(RuntimeError):
    """Channel state with no usable propagation path."""
