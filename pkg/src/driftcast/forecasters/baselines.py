"""Non-learning reference forecasters."""

from __future__ import annotations

import numpy as np

from ..pseudo import PSEUDO_MODES, generate_pseudo_targets
from ..errors import ConfigError
from ..series import Window
from .base import OnlineForecaster, mse


class _Fixed(OnlineForecaster):
    trainable = False

    def update(self, window, targets, lr: float) -> float:
        x = self._check_window(window)
        t = self._check_targets(targets)
        self._check_lr(lr)
        return mse(self._predict(x), t)


class PersistenceForecaster(_Fixed):
    """Repeats the last observed value H times."""

    model_id = "persistence"

    def _predict(self, x: np.ndarray) -> np.ndarray:
        return np.full(self.h, x[-1])


class WindowedLinearForecaster(_Fixed):
    """Forecasts the pseudo targets themselves (clamped-slope line over the window)."""

    model_id = "linear"

    def __init__(self, n: int, h: int, mode: str = "literal"):
        super().__init__(n, h)
        if mode not in PSEUDO_MODES:
            raise ConfigError(f"unknown pseudo-target mode {mode!r}")
        self.mode = mode

    def _predict(self, x: np.ndarray) -> np.ndarray:
        return np.array(generate_pseudo_targets(Window(x, origin=-1), self.h, self.mode).values)

    def config(self) -> dict:
        return {"n": self.n, "h": self.h, "mode": self.mode}
