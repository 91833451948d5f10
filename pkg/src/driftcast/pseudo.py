"""Clamped-slope linear extrapolation of an input window into pseudo targets.

A least-squares line is fitted over local times ``t = 0 .. N-1`` of the window.
Degradation cannot reverse, so a non-negative slope is clamped to zero before
the line is extended over ``t = N .. N+H-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import InvalidArgumentError
from .series import DEFAULT_H, Window, _frozen

PseudoMode = Literal["literal", "mean-reanchor"]
PSEUDO_MODES = ("literal", "mean-reanchor")


@dataclass(frozen=True)
class LinearFit:
    m: float
    m_clamped: float
    b: float
    n: int
    mean: float

    @property
    def clamp_fired(self) -> bool:
        return self.m >= 0

    def at(self, t) -> np.ndarray:
        """Value of the unclamped fitted line at local time(s) ``t``."""
        return self.m * np.asarray(t, dtype=float) + self.b


@dataclass(frozen=True, eq=False)
class PseudoTargets:
    values: np.ndarray
    origin: int
    mode: str = "literal"

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))

    def __len__(self) -> int:
        return int(self.values.size)


def clamp_slope(m: float) -> float:
    return m if m < 0 else 0.0


def fit_line(window: Window) -> LinearFit:
    x = np.asarray(window.values, dtype=float)
    n = x.size
    if n < 2:
        raise InvalidArgumentError("fit_line needs at least 2 points")
    t = np.arange(n, dtype=float)
    t_mean = (n - 1) / 2.0
    x_mean = float(x.mean())
    dt = t - t_mean
    m = float(np.dot(dt, x - x_mean) / np.dot(dt, dt))
    b = x_mean - m * t_mean
    return LinearFit(m=m, m_clamped=clamp_slope(m), b=b, n=n, mean=x_mean)


def extrapolate(fit: LinearFit, h: int = DEFAULT_H, mode: PseudoMode = "literal", origin: int = -1) -> PseudoTargets:
    """Extend the clamped line over the next ``h`` local times.

    ``mean-reanchor`` differs from ``literal`` only when the clamp fired: it
    returns the window mean, the least-squares fit under a zero slope, instead
    of the raw intercept.
    """
    if h < 1:
        raise InvalidArgumentError(f"forecast length must be >= 1, got {h}")
    if mode not in PSEUDO_MODES:
        raise InvalidArgumentError(f"unknown pseudo-target mode {mode!r}")
    if mode == "mean-reanchor" and fit.clamp_fired:
        z = np.full(h, fit.mean)
    else:
        t_forecast = np.arange(fit.n, fit.n + h, dtype=float)
        z = fit.m_clamped * t_forecast + fit.b
    return PseudoTargets(z, origin=origin, mode=mode)


def generate_pseudo_targets(window: Window, h: int = DEFAULT_H, mode: PseudoMode = "literal") -> PseudoTargets:
    return extrapolate(fit_line(window), h, mode, origin=window.origin)


# Alternative pseudo-target sources (moving average, seasonal decomposition)
# plug in with this signature.
PseudoTargetGenerator = Callable[[Window, int], PseudoTargets]


def linear_generator(mode: PseudoMode = "literal") -> PseudoTargetGenerator:
    if mode not in PSEUDO_MODES:
        raise InvalidArgumentError(f"unknown pseudo-target mode {mode!r}")

    def generate(window: Window, h: int) -> PseudoTargets:
        return generate_pseudo_targets(window, h, mode)

    return generate
