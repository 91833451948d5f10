"""Adam and SGD-with-momentum on dicts of numpy arrays, updated in place."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class AdamHyper:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not (self.lr >= 0 and 0 <= self.beta1 < 1 and 0 <= self.beta2 < 1 and self.eps > 0):
            raise ValueError(f"invalid Adam hyperparameters {self}")


@dataclass(frozen=True)
class SgdHyper:
    lr0: float = 0.1
    momentum: float = 0.9
    decay: float = 0.9
    decay_steps: int = 1000

    def __post_init__(self):
        if not (self.lr0 >= 0 and 0 <= self.momentum < 1 and 0 < self.decay <= 1 and self.decay_steps >= 1):
            raise ValueError(f"invalid SGD hyperparameters {self}")

    def lr_at(self, step: int) -> float:
        """Staircase exponential schedule: lr0 * decay ** (step // decay_steps)."""
        return self.lr0 * self.decay ** (step // self.decay_steps)


@dataclass
class AdamState:
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


@dataclass
class SgdState:
    step: int = 0
    velocity: dict[str, np.ndarray] = field(default_factory=dict)


def _check_shapes(params, grads):
    if params.keys() != grads.keys():
        raise ValueError(f"parameter/gradient keys differ: {sorted(params)} vs {sorted(grads)}")
    for k, p in params.items():
        if p.shape != grads[k].shape:
            raise ValueError(f"shape mismatch for {k}: {p.shape} vs {grads[k].shape}")


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray], state: AdamState, hyper: AdamHyper) -> AdamState:
    _check_shapes(params, grads)
    state.step += 1
    bc1 = 1.0 - hyper.beta1**state.step
    bc2 = 1.0 - hyper.beta2**state.step
    for k, p in params.items():
        g = grads[k]
        if k not in state.m:
            state.m[k] = np.zeros_like(p)
            state.v[k] = np.zeros_like(p)
        m, v = state.m[k], state.v[k]
        m *= hyper.beta1
        m += (1.0 - hyper.beta1) * g
        v *= hyper.beta2
        v += (1.0 - hyper.beta2) * (g * g)
        p -= hyper.lr * (m / bc1) / (np.sqrt(v / bc2) + hyper.eps)
    return state


def sgd_momentum_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray], state: SgdState, hyper: SgdHyper) -> SgdState:
    _check_shapes(params, grads)
    lr = hyper.lr_at(state.step)
    for k, p in params.items():
        v = state.velocity.setdefault(k, np.zeros_like(p))
        v *= hyper.momentum
        v += grads[k]
        p -= lr * v
    state.step += 1
    return state
