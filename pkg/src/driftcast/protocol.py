"""Incremental multistep forecasting over a causal sample stream.

Each increment reveals exactly one new sample. The forecast issued at the
previous increment is scored against it, the model is updated, and a fresh
H-step forecast is issued from the window ending at the new sample.

Update strategies:

``pseudo``        previous window -> [new actual, pseudo targets 2..H], at eta0
``pseudo-gamma``  as ``pseudo`` with the learning rate reduced when the
                  previous forecast beat the previous pseudo target
``delayed``       waits until all H actuals of a stored forecast origin are
                  known and trains on them at eta0 (one pair per increment)
``frozen``        never updates; forecasts only
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np
import yaml

from .errors import ConfigError, DriftcastError, InsufficientDataError
from .forecasters import OnlineForecaster, build_forecaster, load_checkpoint, mse
from .pseudo import PSEUDO_MODES, PseudoTargetGenerator, PseudoTargets, linear_generator
from .series import DEFAULT_H, DEFAULT_N, ForecastVector, SoHSeries, Window
from .timing import time_iteration

log = logging.getLogger(__name__)

STRATEGIES = ("pseudo", "pseudo-gamma", "delayed", "frozen")
GAMMA_EPS = 1e-12

# (warm-up learning rate, update learning rate) when the config leaves them unset
MODEL_RATE_DEFAULTS = {
    "mlp": (1e-3, 1e-5),
    "rnn": (0.1, 0.1),
    "persistence": (1e-3, 1e-5),
    "linear": (1e-3, 1e-5),
}

PRETRAIN_MATCH_CRITERIA = ("chemistry", "geometry", "nominal_capacity")


class EndOfStream(DriftcastError):
    pass


class StreamError(DriftcastError, RuntimeError):
    """A failure inside the streaming loop, tagged with the increment."""


class StreamCursor:
    """The only way the engine sees a series.

    Reads are limited to the revealed prefix and the prefix grows by one
    sample per ``advance``. There is deliberately no indexed access to the
    backing series.
    """

    def __init__(self, series: SoHSeries | np.ndarray):
        values = series.values if isinstance(series, SoHSeries) else np.asarray(series, dtype=float)
        self.__values = np.array(values, dtype=float)
        self.__count = 0

    @property
    def revealed_count(self) -> int:
        return self.__count

    def has_next(self) -> bool:
        return self.__count < self.__values.size

    def advance(self) -> float:
        if not self.has_next():
            raise EndOfStream("stream exhausted")
        self.__count += 1
        return float(self.__values[self.__count - 1])

    def revealed(self) -> np.ndarray:
        out = self.__values[: self.__count].copy()
        out.setflags(write=False)
        return out

    def window(self, n: int) -> Window:
        if self.__count < n:
            raise InsufficientDataError(f"only {self.__count} samples revealed, window needs {n}")
        return Window(self.__values[self.__count - n : self.__count], origin=self.__count - 1)

    @property
    def latest(self) -> float:
        if self.__count == 0:
            raise InsufficientDataError("nothing revealed yet")
        return float(self.__values[self.__count - 1])


@dataclass
class RunConfig:
    n: int = DEFAULT_N
    h: int = DEFAULT_H
    warmup_fraction: float = 0.25
    warmup_epochs: int = 8
    warmup_lr: float | None = None
    eta0: float | None = None
    strategy: str = "pseudo"
    pseudo_mode: str = "literal"
    model: str = "mlp"
    model_params: dict = field(default_factory=dict)
    seed: int = 0
    inner_update_epochs: int = 1
    pretrain_series: str | None = None
    checkpoint: str | None = None
    record_timing: bool = True

    def __post_init__(self):
        if self.model not in MODEL_RATE_DEFAULTS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {', '.join(MODEL_RATE_DEFAULTS)}")
        warm, eta = MODEL_RATE_DEFAULTS[self.model]
        if self.warmup_lr is None:
            self.warmup_lr = warm
        if self.eta0 is None:
            self.eta0 = eta
        problems = []
        if not (isinstance(self.n, int) and self.n >= 2):
            problems.append(f"n must be an integer >= 2 (got {self.n!r})")
        if not (isinstance(self.h, int) and self.h >= 1):
            problems.append(f"h must be an integer >= 1 (got {self.h!r})")
        if not 0 < self.warmup_fraction < 1:
            problems.append(f"warmup_fraction must be in (0, 1) (got {self.warmup_fraction!r})")
        if self.warmup_epochs < 0:
            problems.append("warmup_epochs must be >= 0")
        if not self.warmup_lr >= 0:
            problems.append("warmup_lr must be >= 0")
        if not self.eta0 > 0:
            problems.append(f"eta0 must be > 0 (got {self.eta0!r})")
        if self.strategy not in STRATEGIES:
            problems.append(f"strategy must be one of {', '.join(STRATEGIES)} (got {self.strategy!r})")
        if self.pseudo_mode not in PSEUDO_MODES:
            problems.append(f"pseudo_mode must be one of {', '.join(PSEUDO_MODES)} (got {self.pseudo_mode!r})")
        if self.inner_update_epochs < 1:
            problems.append("inner_update_epochs must be >= 1")
        if not isinstance(self.model_params, dict):
            problems.append("model_params must be a mapping")
        if problems:
            raise ConfigError("; ".join(problems))

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return asdict(self)

    def with_overrides(self, **changes) -> "RunConfig":
        data = self.to_dict()
        model_changed = "model" in changes and changes["model"] != self.model
        data.update({k: v for k, v in changes.items() if v is not None})
        if model_changed:
            # re-resolve model-specific defaults unless explicitly given
            for key in ("warmup_lr", "eta0"):
                if changes.get(key) is None:
                    data[key] = None
            if changes.get("model_params") is None:
                data["model_params"] = {}
        return RunConfig.from_mapping(data)


def load_run_config(path) -> RunConfig:
    """Read a YAML (or JSON) mapping whose keys are RunConfig field names."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError:
        raise ConfigError(f"cannot read config file {path}") from None
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a key-value mapping")
    return RunConfig.from_mapping(data)


@dataclass
class StepRecord:
    increment: int
    index: int
    actual: float
    forecast: ForecastVector
    pseudo: PseudoTargets
    loss: float
    err_inc: float
    err_pseudo: float
    gamma: float
    eta: float
    updated: bool
    wall_time_seconds: float
    prev_forecast: ForecastVector | None = None


@dataclass
class RunResult:
    config: RunConfig
    records: list[StepRecord]
    model: OnlineForecaster
    warmup_length: int
    warmup_pairs: int = 0
    metadata: dict = field(default_factory=dict)

    @property
    def n_updates(self) -> int:
        return sum(r.updated for r in self.records)


def gamma_factor(err_inc: float, err_pseudo: float) -> float:
    return err_inc / (err_pseudo + GAMMA_EPS)


def gamma_lr(err_inc: float, err_pseudo: float, eta0: float) -> float:
    """Full rate while the forecast errs at least as much as the pseudo target, else 0.1*eta0*gamma."""
    gamma = gamma_factor(err_inc, err_pseudo)
    return eta0 if gamma >= 1 else 0.1 * eta0 * gamma


def build_update_targets(x_new: float, pseudo: PseudoTargets) -> ForecastVector:
    values = np.array(pseudo.values, dtype=float)
    values[0] = x_new
    return ForecastVector(values, origin=pseudo.origin)


def incremental_loss(forecast, x_new: float, pseudo: PseudoTargets) -> float:
    """Squared error of the first step against the actual plus steps 2..H against pseudo targets, over H."""
    return mse(np.asarray(getattr(forecast, "values", forecast)), build_update_targets(x_new, pseudo).values)


def _training_pairs(values: np.ndarray, n: int, h: int) -> list[tuple[Window, np.ndarray]]:
    return [(Window(values[s : s + n], origin=s + n - 1), values[s + n : s + n + h]) for s in range(len(values) - n - h + 1)]


def warmup_train(model: OnlineForecaster, series_prefix, config: RunConfig, rng: np.random.Generator) -> dict:
    """Offline epochs over every (window, next h actuals) pair inside the prefix."""
    values = series_prefix.values if isinstance(series_prefix, SoHSeries) else np.asarray(series_prefix, dtype=float)
    need = config.n + config.h
    if len(values) < need:
        raise InsufficientDataError(
            f"warm-up needs at least n + h = {need} samples for one training pair, got {len(values)}")
    pairs = _training_pairs(values, config.n, config.h)
    losses = []
    if model.trainable:
        for _ in range(config.warmup_epochs):
            epoch = [model.update(*pairs[i], config.warmup_lr) for i in rng.permutation(len(pairs))]
            losses.append(float(np.mean(epoch)))
    return {"pairs": len(pairs), "epochs": config.warmup_epochs if model.trainable else 0, "epoch_loss": losses}


def pretrain_on_other(model: OnlineForecaster, other_series, config: RunConfig, rng: np.random.Generator) -> dict:
    """Warm-up procedure applied to a whole different series (e.g. a sibling cell)."""
    return warmup_train(model, other_series, config, rng)


class StreamEngine:
    """Holds the model, cursor and the carry-over between increments."""

    def __init__(self, config: RunConfig, model: OnlineForecaster, cursor: StreamCursor,
                 pseudo_generator: PseudoTargetGenerator | None = None):
        if model.n != config.n or model.h != config.h:
            raise ConfigError(f"model sizes n={model.n}, h={model.h} differ from config n={config.n}, h={config.h}")
        self.config = config
        self.model = model
        self.cursor = cursor
        self.pseudo_generator = pseudo_generator or linear_generator(config.pseudo_mode)
        self.increment = 0
        self.window = cursor.window(config.n)
        self.forecast: ForecastVector | None = None
        self.pending: deque[Window] = deque([self.window])
        if config.inner_update_epochs > 1:
            log.warning("inner_update_epochs=%d reuses each streamed sample; expect overfitting",
                        config.inner_update_epochs)

    def step(self) -> StepRecord | None:
        step_fn = step_delayed if self.config.strategy == "delayed" else step_pseudo
        try:
            return step_fn(self, self.cursor)
        except EndOfStream:
            return None
        except DriftcastError as exc:
            raise StreamError(f"increment {self.increment + 1}: {exc}") from exc

    def _score_previous(self, x_new: float, prev_pseudo: PseudoTargets) -> tuple[float, float, float]:
        if self.forecast is None:
            return math.nan, math.nan, 1.0
        err_inc = abs(float(self.forecast.values[0]) - x_new)
        err_pseudo = abs(float(prev_pseudo.values[0]) - x_new)
        return err_inc, err_pseudo, gamma_factor(err_inc, err_pseudo)

    def _issue(self) -> None:
        self.window = self.cursor.window(self.config.n)
        self.forecast = self.model.forecast(self.window)


def step_pseudo(engine: StreamEngine, cursor: StreamCursor) -> StepRecord:
    """Reveal one sample, update on the previous window with [actual, pseudo tail], forecast anew."""
    cfg = engine.config
    x_new = cursor.advance()
    prev_window, prev_forecast = engine.window, engine.forecast

    def work():
        prev_pseudo = engine.pseudo_generator(prev_window, cfg.h)
        err_inc, err_pseudo, gamma = engine._score_previous(x_new, prev_pseudo)
        if cfg.strategy == "pseudo-gamma" and prev_forecast is not None:
            eta = gamma_lr(err_inc, err_pseudo, cfg.eta0)
        else:
            eta = cfg.eta0
        targets = build_update_targets(x_new, prev_pseudo)
        if cfg.strategy == "frozen":
            before = prev_forecast if prev_forecast is not None else engine.model.forecast(prev_window)
            loss, updated = mse(before.values, targets.values), False
        else:
            loss = engine.model.update(prev_window, targets, eta)
            for _ in range(cfg.inner_update_epochs - 1):
                engine.model.update(prev_window, targets, eta)
            updated = True
        engine._issue()
        return prev_pseudo, loss, err_inc, err_pseudo, gamma, eta, updated

    (prev_pseudo, loss, err_inc, err_pseudo, gamma, eta, updated), elapsed = time_iteration(work)
    engine.increment += 1
    return StepRecord(engine.increment, cursor.revealed_count - 1, x_new, engine.forecast, prev_pseudo, loss,
                      err_inc, err_pseudo, gamma, eta, updated, elapsed, prev_forecast)


def step_delayed(engine: StreamEngine, cursor: StreamCursor) -> StepRecord:
    """Reveal one sample; train only on an origin whose h actuals are now all known."""
    cfg = engine.config
    x_new = cursor.advance()
    idx = cursor.revealed_count - 1
    prev_window, prev_forecast = engine.window, engine.forecast

    def work():
        prev_pseudo = engine.pseudo_generator(prev_window, cfg.h)
        err_inc, err_pseudo, gamma = engine._score_previous(x_new, prev_pseudo)
        loss, updated = math.nan, False
        if engine.pending and engine.pending[0].origin + cfg.h <= idx:
            origin_window = engine.pending.popleft()
            o = origin_window.origin
            actuals = cursor.revealed()[o + 1 : o + 1 + cfg.h]
            loss = engine.model.update(origin_window, actuals, cfg.eta0)
            for _ in range(cfg.inner_update_epochs - 1):
                engine.model.update(origin_window, actuals, cfg.eta0)
            updated = True
        engine._issue()
        engine.pending.append(engine.window)
        return prev_pseudo, loss, err_inc, err_pseudo, gamma, updated

    (prev_pseudo, loss, err_inc, err_pseudo, gamma, updated), elapsed = time_iteration(work)
    engine.increment += 1
    return StepRecord(engine.increment, idx, x_new, engine.forecast, prev_pseudo, loss,
                      err_inc, err_pseudo, gamma, cfg.eta0, updated, elapsed, prev_forecast)


def warmup_length(config: RunConfig, series_length: int) -> int:
    return int(series_length * config.warmup_fraction)


def run_stream(config: RunConfig, series: SoHSeries, *, model: OnlineForecaster | None = None,
               pretrain: SoHSeries | None = None,
               cursor_factory: Callable[[SoHSeries], StreamCursor] = StreamCursor,
               pseudo_generator: PseudoTargetGenerator | None = None) -> RunResult:
    """Warm up (optionally after pretraining), then stream until the series is exhausted.

    Deterministic for a fixed (config, series): every random draw comes from
    generators seeded off ``config.seed``.
    """
    w = warmup_length(config, len(series))
    if w < config.n:
        raise InsufficientDataError(
            f"warm-up prefix of {w} samples is shorter than the input window n={config.n}")
    if w >= len(series):
        raise InsufficientDataError("series leaves no samples to stream after warm-up")

    model_ss, shuffle_ss = np.random.SeedSequence(config.seed).spawn(2)
    shuffle_rng = np.random.default_rng(shuffle_ss)
    metadata: dict = {"series_label": series.label, "series_length": len(series)}
    if model is None:
        if config.checkpoint:
            model = load_checkpoint(config.checkpoint, seed=int(model_ss.generate_state(1)[0]))
        else:
            model = build_forecaster(config.model, config.n, config.h,
                                     seed=int(model_ss.generate_state(1)[0]), **config.model_params)
    elif config.checkpoint:
        log.warning("explicit model given; ignoring checkpoint %s", config.checkpoint)

    if pretrain is None and config.pretrain_series:
        from .ingest import DATASET_SCHEMAS, load_cycle_capacity_csv
        pretrain = load_cycle_capacity_csv(config.pretrain_series, DATASET_SCHEMAS["soh"])
    primed = bool(config.checkpoint)
    if pretrain is not None:
        info = pretrain_on_other(model, pretrain, config, shuffle_rng)
        same_nominal = math.isclose(pretrain.nominal_capacity, series.nominal_capacity)
        if not same_nominal:
            log.warning("pretraining series %r has nominal capacity %.3g Ah, target has %.3g Ah",
                        pretrain.label, pretrain.nominal_capacity, series.nominal_capacity)
        metadata["pretrain"] = {"source": pretrain.label, "pairs": info["pairs"], "epochs": info["epochs"],
                                "match_criteria": list(PRETRAIN_MATCH_CRITERIA),
                                "nominal_capacity_match": same_nominal}
        primed = True

    cursor = cursor_factory(series)
    for _ in range(w):
        cursor.advance()
    warm = {"pairs": 0}
    if w >= config.n + config.h:
        warm = warmup_train(model, cursor.revealed(), config, shuffle_rng)
    elif primed:
        log.info("warm-up prefix of %d samples is too short for n + h = %d; relying on pretrained weights",
                 w, config.n + config.h)
    else:
        raise InsufficientDataError(
            f"warm-up prefix of {w} samples needs at least n + h = {config.n + config.h}; "
            "use a longer series, a larger warmup_fraction or pretraining")
    metadata["warmup"] = warm

    engine = StreamEngine(config, model, cursor, pseudo_generator)
    records = []
    while (rec := engine.step()) is not None:
        records.append(rec)
    return RunResult(config, records, model, w, warm["pairs"], metadata)
