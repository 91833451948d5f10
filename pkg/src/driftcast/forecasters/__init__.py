"""Online forecasters: two learners trained by manual backprop, two fixed baselines."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from .base import OnlineForecaster, mse
from .baselines import PersistenceForecaster, WindowedLinearForecaster
from .mlp import MlpForecaster
from .optim import AdamHyper, AdamState, SgdHyper, SgdState, adam_step, sgd_momentum_step
from .rnn import RnnForecaster

MODELS = {
    "mlp": MlpForecaster,
    "rnn": RnnForecaster,
    "persistence": PersistenceForecaster,
    "linear": WindowedLinearForecaster,
}

CHECKPOINT_FORMAT = "driftcast.checkpoint/1"


def build_forecaster(model: str, n: int, h: int, seed=None, **params) -> OnlineForecaster:
    try:
        cls = MODELS[model]
    except KeyError:
        raise ConfigError(f"unknown model {model!r}; choose from {', '.join(MODELS)}") from None
    if cls.trainable:
        params.setdefault("seed", seed)
    try:
        return cls(n, h, **params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for model {model!r}: {exc}") from None


def _encode(obj):
    if isinstance(obj, np.ndarray):
        return {"shape": list(obj.shape), "data": obj.ravel().tolist()}
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        if set(obj) == {"shape", "data"}:
            return np.asarray(obj["data"], dtype=float).reshape(obj["shape"])
        return {k: _decode(v) for k, v in obj.items()}
    return obj


def save_checkpoint(model: OnlineForecaster, path) -> Path:
    """Write the model as JSON: sizes, parameter arrays, optimizer moments and step count.

    Arrays are stored as ``{"shape": [...], "data": [row-major floats]}``.
    """
    path = Path(path)
    doc = {"format": CHECKPOINT_FORMAT, **_encode(model.state_dict())}
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_checkpoint(path, seed=None) -> OnlineForecaster:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ConfigError(f"{path}: not a driftcast checkpoint")
    state = _decode({k: v for k, v in doc.items() if k != "format"})
    cfg = dict(state["config"])
    n, h = cfg.pop("n"), cfg.pop("h")
    model_id = state["model"]
    if model_id == "rnn":
        sgd = SgdHyper(momentum=cfg.pop("momentum"), decay=cfg.pop("lr_decay"), decay_steps=cfg.pop("lr_decay_steps"))
        cfg["sgd"] = sgd
    model = build_forecaster(model_id, n, h, seed=seed, **cfg)
    model.load_state_dict(state)
    return model


__all__ = [
    "AdamHyper", "AdamState", "MODELS", "MlpForecaster", "OnlineForecaster", "PersistenceForecaster",
    "RnnForecaster", "SgdHyper", "SgdState", "WindowedLinearForecaster", "adam_step", "build_forecaster",
    "load_checkpoint", "mse", "save_checkpoint", "sgd_momentum_step",
]
