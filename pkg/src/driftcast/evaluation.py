"""Post-hoc scoring of a finished run, sensitivity sweeps and output files.

Scoring is the one place allowed to read the full series: it runs after the
stream is exhausted and never feeds back into training.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DriftcastError, InvalidArgumentError
from .protocol import RunConfig, RunResult, run_stream
from .series import SoHSeries
from .timing import time_iteration

log = logging.getLogger(__name__)

REPORT_FORMAT = "driftcast.report/1"
TRACE_COLUMNS = ("increment", "actual", "next_step_pred", "hstep_pred", "abs_err_next", "gamma", "eta", "loss", "time_s")
SWEEP_COLUMNS = ("axis", "value", "model", "strategy", "seed", "rmse", "mae", "mae_percent", "rmse_hstep",
                 "mean_time_s", "n_updates", "status", "error")

__all__ = [
    "MetricsReport", "SweepTable", "mae", "posthoc_evaluate", "rmse", "sweep", "time_iteration",
    "write_report_json", "write_sweep_csv", "write_traces_csv",
]


def _pair(pred, actual) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=float).ravel()
    a = np.asarray(actual, dtype=float).ravel()
    if p.shape != a.shape:
        raise InvalidArgumentError(f"length mismatch: {p.size} predictions vs {a.size} actuals")
    if p.size == 0:
        raise InvalidArgumentError("need at least one prediction")
    return p, a


def rmse(pred, actual) -> float:
    p, a = _pair(pred, actual)
    return float(np.sqrt(np.mean((p - a) ** 2)))


def mae(pred, actual) -> float:
    p, a = _pair(pred, actual)
    return float(np.mean(np.abs(p - a)))


@dataclass
class MetricsReport:
    rmse: float
    mae: float
    rmse_hstep: float
    mae_hstep: float
    per_horizon_rmse: list[float]
    per_horizon_count: list[int]
    n_pairs: int
    next_step_abs_errors: list[float]
    h_step_trace: list[tuple[int, float, float]]
    mean_time_s: float
    median_time_s: float
    n_increments: int
    n_updates: int

    @property
    def mae_percent(self) -> float:
        return 100.0 * self.mae

    @property
    def mae_hstep_percent(self) -> float:
        return 100.0 * self.mae_hstep

    def headline(self) -> dict:
        return {
            "rmse": self.rmse,
            "mae": self.mae,
            "mae_percent": self.mae_percent,
            "rmse_hstep": self.rmse_hstep,
            "mae_hstep": self.mae_hstep,
            "mae_hstep_percent": self.mae_hstep_percent,
            "n_pairs": self.n_pairs,
            "n_increments": self.n_increments,
            "n_updates": self.n_updates,
        }


def posthoc_evaluate(run: RunResult, series: SoHSeries) -> MetricsReport:
    """Score every (origin, horizon) pair whose target lies inside the series.

    Forecasts near the end are truncated to the actuals that exist. The
    headline numbers aggregate all pairs; the ``hstep`` numbers use only the
    H-th step of each forecast.
    """
    values = series.values
    L = values.size
    h = run.config.h
    records = sorted(run.records, key=lambda r: r.index)
    sq_sum = np.zeros(h)
    abs_sum = np.zeros(h)
    count = np.zeros(h, dtype=int)
    next_err = []
    trace = []
    for rec in records:
        k = min(h, L - 1 - rec.index)
        if k <= 0:
            continue
        diff = rec.forecast.values[:k] - values[rec.index + 1 : rec.index + 1 + k]
        sq_sum[:k] += diff * diff
        abs_sum[:k] += np.abs(diff)
        count[:k] += 1
        next_err.append(float(abs(diff[0])))
        if k == h:
            target = rec.index + h
            trace.append((target, float(rec.forecast.values[h - 1]), float(values[target])))

    n_pairs = int(count.sum())
    if n_pairs:
        overall_rmse = float(np.sqrt(sq_sum.sum() / n_pairs))
        overall_mae = float(abs_sum.sum() / n_pairs)
    else:
        overall_rmse = overall_mae = math.nan
    with np.errstate(invalid="ignore", divide="ignore"):
        per_h = np.sqrt(sq_sum / count)
    if trace:
        tp = np.array([t[1] for t in trace])
        ta = np.array([t[2] for t in trace])
        rmse_h, mae_h = rmse(tp, ta), mae(tp, ta)
    else:
        rmse_h = mae_h = math.nan
    times = np.array([r.wall_time_seconds for r in records]) if records else np.array([math.nan])
    return MetricsReport(
        rmse=overall_rmse,
        mae=overall_mae,
        rmse_hstep=rmse_h,
        mae_hstep=mae_h,
        per_horizon_rmse=[float(v) for v in per_h],
        per_horizon_count=[int(c) for c in count],
        n_pairs=n_pairs,
        next_step_abs_errors=next_err,
        h_step_trace=trace,
        mean_time_s=float(np.mean(times)),
        median_time_s=float(np.median(times)),
        n_increments=len(records),
        n_updates=sum(r.updated for r in records),
    )


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _cell(x) -> str:
    return "" if x is None or (isinstance(x, float) and not math.isfinite(x)) else repr(float(x))


def report_document(run: RunResult, series: SoHSeries, metrics: MetricsReport) -> dict:
    cfg = run.config
    timing = None
    if cfg.record_timing:
        timing = {"mean_s_per_it": metrics.mean_time_s, "median_s_per_it": metrics.median_time_s}
    return {
        "format": REPORT_FORMAT,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "series": {"label": series.label, "length": len(series), "nominal_capacity": series.nominal_capacity},
        "warmup_length": run.warmup_length,
        "warmup_pairs": run.warmup_pairs,
        "n_updates": run.n_updates,
        "metrics": {k: _num(v) if isinstance(v, float) else v for k, v in metrics.headline().items()},
        "per_horizon_rmse": [_num(v) for v in metrics.per_horizon_rmse],
        "timing": timing,
        "metadata": _jsonable(run.metadata),
        "notes": ["no model updates were performed"] if run.n_updates == 0 else [],
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return _num(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_report_json(run: RunResult, series: SoHSeries, metrics: MetricsReport, path) -> Path:
    path = Path(path)
    doc = report_document(run, series, metrics)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
    return path


def trace_rows(run: RunResult) -> list[dict]:
    """One row per increment, every column aligned on that increment's actual.

    ``next_step_pred`` is the previous increment's 1-step forecast and
    ``hstep_pred`` the H-step forecast issued H increments earlier.
    """
    h = run.config.h
    by_origin = {r.index: r for r in run.records}
    rows = []
    for r in sorted(run.records, key=lambda r: r.index):
        nxt = None if r.prev_forecast is None else float(r.prev_forecast.values[0])
        src = by_origin.get(r.index - h)
        hstep = None if src is None else float(src.forecast.values[h - 1])
        rows.append({
            "increment": r.increment,
            "actual": r.actual,
            "next_step_pred": nxt,
            "hstep_pred": hstep,
            "abs_err_next": None if nxt is None else abs(nxt - r.actual),
            "gamma": r.gamma,
            "eta": r.eta,
            "loss": r.loss,
            "time_s": r.wall_time_seconds if run.config.record_timing else None,
        })
    return rows


def write_traces_csv(run: RunResult, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in trace_rows(run):
            w.writerow([row["increment"]] + [_cell(row[c]) for c in TRACE_COLUMNS[1:]])
    return path


@dataclass
class SweepTable:
    axis: str
    grid: list[int]
    rows: list[dict] = field(default_factory=list)

    def for_model(self, model: str) -> list[dict]:
        return sorted((r for r in self.rows if r["model"] == model), key=lambda r: r["value"])


def _sweep_cell(args) -> dict:
    config, axis, value, series = args
    row = {"axis": axis, "value": value, "model": config.model, "strategy": config.strategy, "seed": config.seed,
           "rmse": None, "mae": None, "mae_percent": None, "rmse_hstep": None, "mean_time_s": None,
           "n_updates": None, "status": "ok", "error": ""}
    try:
        run = run_stream(config, series)
        m = posthoc_evaluate(run, series)
    except DriftcastError as exc:
        row.update(status="failed", error=str(exc))
        return row
    row.update(rmse=m.rmse, mae=m.mae, mae_percent=m.mae_percent, rmse_hstep=m.rmse_hstep,
               mean_time_s=m.mean_time_s if config.record_timing else None, n_updates=m.n_updates)
    return row


def sweep(base_config: RunConfig, axis: str, grid, series: SoHSeries, models=None, jobs: int = 1) -> SweepTable:
    """One full run per (model, grid value), all with the base seed.

    A failing cell is recorded with ``status="failed"`` and does not stop the rest.
    """
    if axis not in ("n", "h"):
        raise InvalidArgumentError(f"sweep axis must be 'n' or 'h', got {axis!r}")
    grid = [int(v) for v in grid]
    if not grid:
        raise InvalidArgumentError("sweep grid is empty")
    models = list(models) if models else [base_config.model]
    cells = []
    for model in models:
        for value in grid:
            cfg = base_config.with_overrides(model=model, **{axis: value})
            cells.append((cfg, axis, value, series))
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(c) for c in cells]
    return SweepTable(axis, grid, rows)


def write_sweep_csv(table: SweepTable, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for row in table.rows:
            w.writerow([_cell(row[c]) if c in ("rmse", "mae", "mae_percent", "rmse_hstep", "mean_time_s")
                        else ("" if row[c] is None else row[c]) for c in SWEEP_COLUMNS])
    return path
