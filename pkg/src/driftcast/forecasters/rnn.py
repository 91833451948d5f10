"""Vanilla (Elman) recurrent forecaster with dropout and a sigmoid readout.

The window is fed as a length-N sequence of scalars. The final hidden state
goes through dropout and a fully connected layer to H sigmoid outputs.
Training uses SGD with momentum and a staircase exponential learning-rate
schedule; gradients come from full backpropagation through time.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from ..errors import ConfigError
from .base import OnlineForecaster
from .optim import SgdHyper, SgdState, sgd_momentum_step


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


class RnnForecaster(OnlineForecaster):
    model_id = "rnn"

    def __init__(self, n: int, h: int, hidden: int = 50, dropout: float = 0.2, seed=None,
                 sgd: SgdHyper | None = None):
        super().__init__(n, h)
        if hidden < 1 or not 0 <= dropout < 1:
            raise ConfigError(f"invalid RNN settings hidden={hidden}, dropout={dropout}")
        self.hidden = hidden
        self.dropout = dropout
        self.hyper = sgd or SgdHyper()
        self.opt = SgdState()
        init_ss, drop_ss = np.random.SeedSequence(seed).spawn(2)
        rng = np.random.default_rng(init_ss)
        self._dropout_rng = np.random.default_rng(drop_ss)
        lim = 1.0 / np.sqrt(hidden)
        self.Wx = rng.uniform(-lim, lim, hidden)
        self.Wh = rng.uniform(-lim, lim, (hidden, hidden))
        self.bh = rng.uniform(-lim, lim, hidden)
        self.Wo = rng.uniform(-lim, lim, (h, hidden))
        self.bo = rng.uniform(-lim, lim, h)

    def params(self) -> dict[str, np.ndarray]:
        return {"Wx": self.Wx, "Wh": self.Wh, "bh": self.bh, "Wo": self.Wo, "bo": self.bo}

    def _run(self, x: np.ndarray) -> list[np.ndarray]:
        hs = [np.zeros(self.hidden)]
        for xt in x:
            hs.append(np.tanh(self.Wx * xt + self.Wh @ hs[-1] + self.bh))
        return hs

    def _predict(self, x: np.ndarray) -> np.ndarray:
        # inference: dropout off
        return _sigmoid(self.Wo @ self._run(x)[-1] + self.bo)

    def dropout_mask(self) -> np.ndarray:
        keep = 1.0 - self.dropout
        if self.dropout == 0:
            return np.ones(self.hidden)
        return (self._dropout_rng.random(self.hidden) < keep) / keep

    def forward_backward(self, x: np.ndarray, targets: np.ndarray, mask: np.ndarray | None = None):
        """Outputs, MSE loss and BPTT gradients. ``mask=None`` means no dropout."""
        hs = self._run(x)
        d = hs[-1] if mask is None else hs[-1] * mask
        y = _sigmoid(self.Wo @ d + self.bo)
        diff = y - targets
        loss = float(np.mean(diff * diff))

        d_o = (2.0 / self.h) * diff * y * (1.0 - y)
        grads = {
            "Wo": np.outer(d_o, d),
            "bo": d_o,
            "Wx": np.zeros_like(self.Wx),
            "Wh": np.zeros_like(self.Wh),
            "bh": np.zeros_like(self.bh),
        }
        d_h = self.Wo.T @ d_o
        if mask is not None:
            d_h = d_h * mask
        for t in range(len(x) - 1, -1, -1):
            d_a = d_h * (1.0 - hs[t + 1] ** 2)
            grads["Wx"] += d_a * x[t]
            grads["Wh"] += np.outer(d_a, hs[t])
            grads["bh"] += d_a
            d_h = self.Wh.T @ d_a
        return y, loss, grads

    def update(self, window, targets, lr: float) -> float:
        x = self._check_window(window)
        t = self._check_targets(targets)
        lr = self._check_lr(lr)
        mask = self.dropout_mask() if self.dropout > 0 else None
        loss = self.loss(x, t)
        _, _, grads = self.forward_backward(x, t, mask)
        sgd_momentum_step(self.params(), grads, self.opt, replace(self.hyper, lr0=lr))
        return loss

    def loss(self, x: np.ndarray, targets: np.ndarray) -> float:
        diff = self._predict(x) - targets
        return float(np.mean(diff * diff))

    def config(self) -> dict:
        return {"n": self.n, "h": self.h, "hidden": self.hidden, "dropout": self.dropout,
                "lr_decay": self.hyper.decay, "lr_decay_steps": self.hyper.decay_steps,
                "momentum": self.hyper.momentum}

    def state_dict(self) -> dict:
        return {
            "model": self.model_id,
            "config": self.config(),
            "params": {k: v.copy() for k, v in self.params().items()},
            "optimizer": {
                "kind": "sgd",
                "step": self.opt.step,
                "velocity": {k: v.copy() for k, v in self.opt.velocity.items()},
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
        self.opt = SgdState(
            step=int(opt.get("step", 0)),
            velocity={k: np.array(v, dtype=float) for k, v in opt.get("velocity", {}).items()},
        )
