"""Per-cycle capacity loaders and a synthetic degradation generator.

Loaders expect a table that already holds one capacity value per cycle;
extracting capacity from raw charge/discharge waveforms happens upstream.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import DataError, InvalidArgumentError
from .series import SoHSeries, soh_from_capacity

SOH_FLOOR = 1e-3


@dataclass(frozen=True)
class CsvSchema:
    """Where the cycle and capacity live in a CSV file.

    Columns are header names when ``header`` is true, zero-based indices
    otherwise (an int works in both cases). ``value_kind="soh"`` reads the
    value column as SoH fractions instead of amp-hours.
    """

    cycle_column: str | int = "cycle"
    capacity_column: str | int = "capacity"
    delimiter: str = ","
    header: bool = True
    nominal_capacity: float = 1.0
    value_kind: Literal["capacity", "soh"] = "capacity"

    def __post_init__(self):
        if not self.nominal_capacity > 0:
            raise InvalidArgumentError(f"nominal capacity must be > 0, got {self.nominal_capacity}")
        if self.value_kind not in ("capacity", "soh"):
            raise InvalidArgumentError(f"value_kind must be 'capacity' or 'soh', got {self.value_kind!r}")


# Column names follow common per-cycle exports of each public dataset.
DATASET_SCHEMAS: dict[str, CsvSchema] = {
    "nasa": CsvSchema("cycle", "capacity", nominal_capacity=2.0),
    "mit": CsvSchema("cycle", "QDischarge", nominal_capacity=1.1),
    "calce": CsvSchema("Cycle_Index", "Discharge_Capacity(Ah)", nominal_capacity=1.35),
    "soh": CsvSchema("cycle", "soh", nominal_capacity=1.0, value_kind="soh"),
}


def _resolve(col, names: list[str] | None, path) -> int:
    if isinstance(col, int):
        return col
    if names is None:
        if str(col).isdigit():
            return int(col)
        raise DataError(f"{path}: column {col!r} given by name but the schema has no header")
    try:
        return names.index(col)
    except ValueError:
        raise DataError(f"{path}: missing column {col!r} (have {', '.join(names)})") from None


def load_cycle_capacity_csv(path, schema: CsvSchema = CsvSchema(), label: str | None = None) -> SoHSeries:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8-sig")
    except OSError as exc:
        raise DataError(f"{path}: cannot read ({exc.strerror or exc})") from None
    lines = [ln for ln in text.splitlines() if not ln.lstrip().startswith("#")]
    rows = [r for r in csv.reader(lines, delimiter=schema.delimiter) if any(c.strip() for c in r)]
    names = None
    first_line = 1
    if schema.header:
        if not rows:
            raise DataError(f"{path}: empty file")
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
        first_line = 2
    if not rows:
        raise DataError(f"{path}: no data rows")
    ci = _resolve(schema.cycle_column, names, path)
    vi = _resolve(schema.capacity_column, names, path)
    col_name = (lambda i: names[i] if names and i < len(names) else f"#{i}")

    cycles, values = [], []
    for offset, row in enumerate(rows):
        line = first_line + offset
        for idx in (ci, vi):
            if idx >= len(row):
                raise DataError(f"{path}: row {line} has no column {col_name(idx)}")
        try:
            cyc = float(row[ci])
            if not cyc.is_integer():
                raise ValueError
        except ValueError:
            raise DataError(f"{path}: row {line}, column {col_name(ci)}: non-integer cycle {row[ci]!r}") from None
        try:
            val = float(row[vi])
            if not math.isfinite(val):
                raise ValueError
        except ValueError:
            raise DataError(f"{path}: row {line}, column {col_name(vi)}: non-numeric value {row[vi]!r}") from None
        cycles.append(int(cyc))
        if schema.value_kind == "capacity":
            try:
                val = soh_from_capacity(val, schema.nominal_capacity)
            except InvalidArgumentError as exc:
                raise DataError(f"{path}: row {line}, column {col_name(vi)}: {exc}") from None
        values.append(val)

    cycles_arr = np.asarray(cycles, dtype=np.int64)
    order = np.argsort(cycles_arr, kind="stable")
    cycles_arr = cycles_arr[order]
    dup = np.flatnonzero(np.diff(cycles_arr) == 0)
    if dup.size:
        raise DataError(f"{path}: duplicate cycle index {cycles_arr[dup[0]]}")
    try:
        return SoHSeries(cycles_arr, np.asarray(values)[order], schema.nominal_capacity,
                         label if label is not None else path.stem)
    except InvalidArgumentError as exc:
        raise DataError(f"{path}: {exc}") from None


def write_series_csv(series: SoHSeries, path) -> Path:
    """Write ``cycle,soh`` rows; reload with ``DATASET_SCHEMAS['soh']``."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cycle", "soh"])
        for c, v in zip(series.cycles.tolist(), series.values.tolist()):
            w.writerow([c, repr(v)])
    return path


@dataclass(frozen=True)
class SynthParams:
    length: int
    model: Literal["linear", "exponential-knee"] = "linear"
    initial_soh: float = 1.0
    end_soh: float = 0.8
    knee_position: float = 0.8
    knee_sharpness: float = 6.0
    spike_rate: float = 0.0
    spike_amplitude: float = 0.0
    spike_decay: float = 5.0
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        problems = []
        if self.length < 1:
            problems.append("length must be >= 1")
        if self.model not in ("linear", "exponential-knee"):
            problems.append(f"unknown model {self.model!r}")
        if not 0 < self.end_soh < self.initial_soh <= 1.1:
            problems.append("need 0 < end_soh < initial_soh <= 1.1")
        if not 0 <= self.spike_rate <= 1:
            problems.append("spike_rate must be in [0, 1]")
        if self.spike_amplitude < 0 or self.noise_sigma < 0 or self.spike_decay <= 0 or self.knee_sharpness <= 0:
            problems.append("amplitudes, sigma, decay and sharpness must be non-negative (decay, sharpness > 0)")
        if problems:
            raise InvalidArgumentError("; ".join(problems))


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def base_trajectory(p: SynthParams) -> np.ndarray:
    """Noise- and spike-free curve, non-increasing from initial_soh to end_soh.

    The knee model is a normalised logistic in cycle fraction u: slow fade,
    fastest fade at ``knee_position``, then easing off. Far left of the knee it
    reduces to the exponential form (e^{k u} - 1) / (e^k - 1).
    """
    u = np.arange(p.length) / max(p.length - 1, 1)
    drop = p.initial_soh - p.end_soh
    if p.model == "linear":
        frac = u
    else:
        k, c = p.knee_sharpness, p.knee_position
        lo, hi = _sigmoid(-k * c), _sigmoid(k * (1.0 - c))
        frac = (_sigmoid(k * (u - c)) - lo) / (hi - lo)
    return p.initial_soh - drop * frac


def synth_degradation(params: SynthParams, label: str | None = None) -> SoHSeries:
    """Base curve + decaying regeneration spikes at random cycles + Gaussian noise."""
    rng = np.random.default_rng(params.seed)
    n = params.length
    events = np.flatnonzero(rng.random(n) < params.spike_rate)
    noise = rng.normal(0.0, 1.0, n) * params.noise_sigma
    values = base_trajectory(params)
    if params.spike_amplitude > 0:
        t = np.arange(n)
        for e in events:
            lag = t[e:] - e
            values[e:] += params.spike_amplitude * np.exp(-lag / params.spike_decay)
    values = np.maximum(values + noise, SOH_FLOOR)
    return SoHSeries.from_values(values, label=label or f"synth-{params.model}-{n}")


_PRESETS = {
    # smooth trajectories with a knee (MIT-like cells, 1.1 Ah)
    "smooth-short": SynthParams(557, "exponential-knee", 1.0, 0.8, 0.8, 6.0, noise_sigma=5e-4, seed=21),
    "smooth-long": SynthParams(1224, "exponential-knee", 1.0, 0.8, 0.8, 6.0, noise_sigma=5e-4, seed=3),
    # irregular trajectories with capacity regeneration, no knee (NASA- and CALCE-like)
    "irregular-short": SynthParams(168, "linear", 0.93, 0.66, spike_rate=0.06, spike_amplitude=0.025,
                                   spike_decay=4.0, noise_sigma=4e-3, seed=5),
    "irregular-long": SynthParams(1887, "linear", 1.0, 0.55, spike_rate=0.02, spike_amplitude=0.02,
                                  spike_decay=8.0, noise_sigma=3e-3, seed=36),
}

PRESET_NOMINAL = {"smooth-short": 1.1, "smooth-long": 1.1, "irregular-short": 2.0, "irregular-long": 1.35}


def preset_profiles() -> dict[str, SynthParams]:
    return dict(_PRESETS)


def preset_series(name: str, **overrides) -> SoHSeries:
    try:
        params = _PRESETS[name]
    except KeyError:
        raise InvalidArgumentError(f"unknown preset {name!r}; valid presets: {', '.join(_PRESETS)}") from None
    if overrides:
        params = replace(params, **overrides)
    s = synth_degradation(params, label=name)
    return SoHSeries(s.cycles, s.values, PRESET_NOMINAL[name], name)


def params_dict(params: SynthParams) -> dict:
    return asdict(params)
