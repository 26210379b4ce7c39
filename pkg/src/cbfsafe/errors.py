"""Exception types shared across the package."""


class ShapeError(ValueError):
    """An array argument has the wrong length or shape."""


class ParameterError(ValueError):
    """A scalar parameter is outside its admissible range."""


class ConfigError(ValueError):
    """A run configuration is invalid. ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class ConsistencyError(AssertionError):
    """An internal invariant failed; this indicates a bug, not bad input."""


class TrainingDivergedError(RuntimeError):
    """A loss became non-finite during training."""

    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump or {}
