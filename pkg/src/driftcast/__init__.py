"""Incremental multistep forecasting of battery state of health with pseudo targets."""

from .errors import ConfigError, DataError, DriftcastError, InsufficientDataError, InvalidArgumentError
from .evaluation import MetricsReport, SweepTable, mae, posthoc_evaluate, rmse, sweep
from .forecasters import build_forecaster, load_checkpoint, save_checkpoint
from .ingest import CsvSchema, SynthParams, load_cycle_capacity_csv, preset_profiles, preset_series, synth_degradation
from .protocol import (
    RunConfig,
    RunResult,
    StepRecord,
    StreamCursor,
    build_update_targets,
    gamma_lr,
    run_stream,
    warmup_train,
)
from .pseudo import LinearFit, PseudoTargets, clamp_slope, extrapolate, fit_line, generate_pseudo_targets
from .series import ForecastVector, SoHSeries, Window, make_window, soh_from_capacity

__version__ = "0.1.0"
