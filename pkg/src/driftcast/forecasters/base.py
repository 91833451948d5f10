"""The contract every online forecaster satisfies."""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from ..errors import ConfigError, InvalidArgumentError
from ..series import ForecastVector, Window


def mse(pred: np.ndarray, target: np.ndarray) -> float:
    diff = np.asarray(pred, dtype=float) - np.asarray(target, dtype=float)
    return float(np.mean(diff * diff))


class OnlineForecaster(ABC):
    """Maps an N-sample window to H future samples and learns one step at a time.

    ``update`` only mutates the forecaster itself. It never sees the stream,
    so whatever it learns from is exactly what the caller hands it.
    """

    model_id: str = "base"
    trainable: bool = True

    def __init__(self, n: int, h: int):
        if n < 2 or h < 1:
            raise ConfigError(f"need n >= 2 and h >= 1, got n={n}, h={h}")
        self.n = n
        self.h = h

    def _check_window(self, window: Window) -> np.ndarray:
        if len(window) != self.n:
            raise ConfigError(f"{self.model_id} expects windows of {self.n} samples, got {len(window)}")
        return np.asarray(window.values, dtype=float)

    def _check_targets(self, targets) -> np.ndarray:
        t = np.asarray(getattr(targets, "values", targets), dtype=float)
        if t.shape != (self.h,):
            raise ConfigError(f"{self.model_id} expects {self.h} targets, got shape {t.shape}")
        if not np.all(np.isfinite(t)):
            raise InvalidArgumentError("update targets must be finite")
        return t

    @staticmethod
    def _check_lr(lr: float) -> float:
        if not (lr >= 0 and np.isfinite(lr)):
            raise InvalidArgumentError(f"learning rate must be finite and >= 0, got {lr!r}")
        return float(lr)

    def forecast(self, window: Window) -> ForecastVector:
        x = self._check_window(window)
        return ForecastVector(self._predict(x), origin=window.origin)

    @abstractmethod
    def _predict(self, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def update(self, window: Window, targets, lr: float) -> float:
        """One optimizer step on (window, targets); returns the MSE before the step."""

    def params(self) -> dict[str, np.ndarray]:
        return {}

    def state_dict(self) -> dict:
        return {"model": self.model_id, "config": self.config(), "params": {}, "optimizer": {}}

    def load_state_dict(self, state: dict) -> None:
        if state.get("model") != self.model_id:
            raise ConfigError(f"checkpoint is for {state.get('model')!r}, not {self.model_id!r}")
        if state.get("config", {}).get("n") != self.n or state.get("config", {}).get("h") != self.h:
            raise ConfigError("checkpoint window/horizon sizes do not match this model")

    def config(self) -> dict:
        return {"n": self.n, "h": self.h}
