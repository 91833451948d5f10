"""Single-hidden-layer perceptron trained with Adam by manual backprop."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from ..errors import ConfigError
from .base import OnlineForecaster
from .optim import AdamHyper, AdamState, adam_step


class MlpForecaster(OnlineForecaster):
    """N -> hidden (ReLU) -> H (linear).

    With ``residual=True`` (the default) the network sees the window relative
    to its last value, scaled by ``input_scale``, and predicts offsets from
    that last value. Only the current window is used, so the encoding is
    causal and needs no fitted scaler.
    """

    model_id = "mlp"

    def __init__(self, n: int, h: int, hidden: int = 64, residual: bool = True, input_scale: float = 100.0,
                 seed=None, adam: AdamHyper | None = None):
        super().__init__(n, h)
        if hidden < 1 or not input_scale > 0:
            raise ConfigError(f"invalid MLP settings hidden={hidden}, input_scale={input_scale}")
        self.hidden = hidden
        self.residual = residual
        self.input_scale = float(input_scale) if residual else 1.0
        self.hyper = adam or AdamHyper()
        self.opt = AdamState()
        rng = np.random.default_rng(seed)
        lim1, lim2 = 1.0 / np.sqrt(n), 1.0 / np.sqrt(hidden)
        self.W1 = rng.uniform(-lim1, lim1, (hidden, n))
        self.b1 = rng.uniform(-lim1, lim1, hidden)
        self.W2 = rng.uniform(-lim2, lim2, (h, hidden))
        self.b2 = rng.uniform(-lim2, lim2, h)

    def params(self) -> dict[str, np.ndarray]:
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2}

    def _encode(self, x: np.ndarray) -> tuple[np.ndarray, float]:
        if self.residual:
            anchor = float(x[-1])
            return (x - anchor) * self.input_scale, anchor
        return x, 0.0

    def _predict(self, x: np.ndarray) -> np.ndarray:
        u, anchor = self._encode(x)
        a = np.maximum(self.W1 @ u + self.b1, 0.0)
        return anchor + (self.W2 @ a + self.b2) / self.input_scale

    def loss_and_grads(self, x: np.ndarray, targets: np.ndarray) -> tuple[float, dict[str, np.ndarray]]:
        u, anchor = self._encode(x)
        z1 = self.W1 @ u + self.b1
        a = np.maximum(z1, 0.0)
        y = anchor + (self.W2 @ a + self.b2) / self.input_scale
        diff = y - targets
        loss = float(np.mean(diff * diff))
        d_out = (2.0 / self.h) * diff / self.input_scale
        d_a = self.W2.T @ d_out
        d_z1 = d_a * (z1 > 0)
        grads = {
            "W1": np.outer(d_z1, u),
            "b1": d_z1,
            "W2": np.outer(d_out, a),
            "b2": d_out,
        }
        return loss, grads

    def update(self, window, targets, lr: float) -> float:
        x = self._check_window(window)
        t = self._check_targets(targets)
        lr = self._check_lr(lr)
        loss, grads = self.loss_and_grads(x, t)
        adam_step(self.params(), grads, self.opt, replace(self.hyper, lr=lr))
        return loss

    def config(self) -> dict:
        return {"n": self.n, "h": self.h, "hidden": self.hidden, "residual": self.residual,
                "input_scale": self.input_scale}

    def state_dict(self) -> dict:
        return {
            "model": self.model_id,
            "config": self.config(),
            "params": {k: v.copy() for k, v in self.params().items()},
            "optimizer": {
                "kind": "adam",
                "step": self.opt.step,
                "m": {k: v.copy() for k, v in self.opt.m.items()},
                "v": {k: v.copy() for k, v in self.opt.v.items()},
            },
        }

    def load_state_dict(self, state: dict) -> None:
        super().load_state_dict(state)
        for k, p in self.params().items():
            src = np.asarray(state["params"][k], dtype=float)
            if src.shape != p.shape:
                raise ConfigError(f"checkpoint parameter {k} has shape {src.shape}, expected {p.shape}")
            p[...] = src
        opt = state.get("optimizer") or {}
        self.opt = AdamState(
            step=int(opt.get("step", 0)),
            m={k: np.array(v, dtype=float) for k, v in opt.get("m", {}).items()},
            v={k: np.array(v, dtype=float) for k, v in opt.get("v", {}).items()},
        )


