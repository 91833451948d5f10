"""Core value types: SoH series, input windows and forecast vectors."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, InvalidArgumentError

log = logging.getLogger(__name__)

DEFAULT_N = 10
DEFAULT_H = 30
SOH_WARN_CEILING = 1.5


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def soh_from_capacity(q_full: float, q_nominal: float) -> float:
    """State of health as a fraction: full-charge capacity over nominal capacity.

    Kept as a fraction everywhere; percentages appear only in reports.
    """
    if not q_nominal > 0:
        raise InvalidArgumentError(f"nominal capacity must be > 0, got {q_nominal!r}")
    if q_full < 0:
        raise InvalidArgumentError(f"full-charge capacity must be >= 0, got {q_full!r}")
    return q_full / q_nominal


@dataclass(frozen=True, eq=False)
class SoHSeries:
    cycles: np.ndarray
    values: np.ndarray
    nominal_capacity: float = 1.0
    label: str = ""

    def __post_init__(self):
        cycles = _frozen(self.cycles, dtype=np.int64)
        values = _frozen(self.values)
        if values.ndim != 1 or cycles.shape != values.shape:
            raise InvalidArgumentError("cycles and values must be 1-D and of equal length")
        if values.size < 1:
            raise InvalidArgumentError("a series needs at least one sample")
        if np.any(np.diff(cycles) <= 0):
            raise InvalidArgumentError("cycle indices must be strictly increasing")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise InvalidArgumentError("SoH values must be finite and > 0")
        if not self.nominal_capacity > 0:
            raise InvalidArgumentError("nominal capacity must be > 0")
        if values.max() > SOH_WARN_CEILING:
            log.warning("series %r has SoH above %.2f (max %.4f)", self.label, SOH_WARN_CEILING, values.max())
        object.__setattr__(self, "cycles", cycles)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values, label: str = "", nominal_capacity: float = 1.0, start_cycle: int = 1) -> "SoHSeries":
        values = np.asarray(values, dtype=float)
        cycles = np.arange(start_cycle, start_cycle + values.size)
        return cls(cycles, values, nominal_capacity, label)

    def __len__(self) -> int:
        return int(self.values.size)

    def prefix(self, length: int) -> "SoHSeries":
        return SoHSeries(self.cycles[:length], self.values[:length], self.nominal_capacity, self.label)


@dataclass(frozen=True, eq=False)
class Window:
    """The N most recent samples, oldest first. ``origin`` indexes the last one."""

    values: np.ndarray
    origin: int

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1 or values.size < 2:
            raise InvalidArgumentError(f"a window needs at least 2 values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("window values must be finite")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def last(self) -> float:
        return float(self.values[-1])


@dataclass(frozen=True, eq=False)
class ForecastVector:
    """H consecutive predictions issued from sample ``origin``; values[j] targets origin + j + 1."""

    values: np.ndarray
    origin: int = -1

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1 or values.size < 1:
            raise InvalidArgumentError(f"a forecast needs at least 1 value, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("forecast values must be finite")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)


def make_window(series, t_end: int, n: int = DEFAULT_N) -> Window:
    """Slice the ``n`` values ending at ``t_end`` (inclusive). Never pads.

    ``series`` may be a SoHSeries or any 1-D sequence of floats.
    """
    values = series.values if isinstance(series, SoHSeries) else np.asarray(series, dtype=float)
    if n < 2:
        raise InvalidArgumentError(f"window length must be >= 2, got {n}")
    if not 0 <= t_end < len(values):
        raise InvalidArgumentError(f"t_end={t_end} outside series of length {len(values)}")
    if t_end < n - 1:
        raise InsufficientDataError(f"window of {n} ending at index {t_end} needs {n - t_end - 1} more samples of history")
    return Window(values[t_end - n + 1 : t_end + 1], origin=t_end)

