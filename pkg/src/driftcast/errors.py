"""Exception hierarchy shared across the package."""


class DriftcastError(Exception):
    """Base class for every error raised by driftcast."""


class InvalidArgumentError(DriftcastError, ValueError):
    pass


class InsufficientDataError(DriftcastError, ValueError):
    """Not enough samples to build a window, a training pair or a run."""


class ConfigError(DriftcastError, ValueError):
    """Configuration inconsistent with the data or the model."""


class DataError(DriftcastError, ValueError):
    """Malformed input file (missing column, bad cell, bad ordering)."""
