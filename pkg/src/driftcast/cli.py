"""driftcast command line: run, sweep, synth, report.

Exit codes: 0 success, 1 configuration/usage error, 2 data error,
3 failure while running.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ConfigError, DataError, DriftcastError, InsufficientDataError, InvalidArgumentError
from .evaluation import posthoc_evaluate, sweep, write_report_json, write_sweep_csv, write_traces_csv
from .forecasters import MODELS, save_checkpoint
from .ingest import (
    DATASET_SCHEMAS,
    PRESET_NOMINAL,
    SynthParams,
    load_cycle_capacity_csv,
    preset_profiles,
    preset_series,
    synth_degradation,
)
from .protocol import STRATEGIES, RunConfig, load_run_config, run_stream

log = logging.getLogger("driftcast")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3
REPORT_COLUMNS = ("model", "dataset", "strategy", "n", "h", "seed", "RMSE", "MAE %", "Time s/it", "warning")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def parse_grid(text: str) -> list[int]:
    """``5,10,20`` or ``2..20`` or ``2..20:2`` (inclusive range with step)."""
    text = (text or "").strip()
    if not text:
        raise UsageError("empty --grid")
    values = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if ".." in part:
            rng, _, step = part.partition(":")
            lo, _, hi = rng.partition("..")
            try:
                lo_i, hi_i, st = int(lo), int(hi), int(step or 1)
            except ValueError:
                raise UsageError(f"bad grid range {part!r}") from None
            if st < 1 or hi_i < lo_i:
                raise UsageError(f"bad grid range {part!r}")
            values.extend(range(lo_i, hi_i + 1, st))
        else:
            try:
                values.append(int(part))
            except ValueError:
                raise UsageError(f"bad grid value {part!r}") from None
    if not values:
        raise UsageError("empty --grid")
    return values


def _base_config(args) -> RunConfig:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    overrides = {
        "seed": args.seed,
        "strategy": args.strategy,
        "n": args.n,
        "h": args.h,
    }
    if getattr(args, "model", None) and "," not in args.model:
        overrides["model"] = args.model
    if getattr(args, "no_timing", False):
        overrides["record_timing"] = False
    return cfg.with_overrides(**overrides)


def _load_series(args):
    if args.data and args.preset:
        raise UsageError("give either --data or --preset, not both")
    if args.preset:
        try:
            return preset_series(args.preset)
        except InvalidArgumentError as exc:
            raise UsageError(str(exc)) from None
    if not args.data:
        raise UsageError("one of --data or --preset is required")
    schema = DATASET_SCHEMAS[args.schema]
    return load_cycle_capacity_csv(args.data, schema)


def cmd_run(args) -> int:
    cfg = _base_config(args)
    series = _load_series(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    run = run_stream(cfg, series)
    metrics = posthoc_evaluate(run, series)
    write_report_json(run, series, metrics, out / "report.json")
    write_traces_csv(run, out / "traces.csv")
    save_checkpoint(run.model, out / "model.json")
    timing = f"{metrics.mean_time_s:.5f} s/it" if cfg.record_timing else "timing off"
    print(f"{series.label}: model={cfg.model} strategy={cfg.strategy} n={cfg.n} h={cfg.h} seed={cfg.seed}")
    print(f"RMSE {metrics.rmse:.5f}  MAE% {metrics.mae_percent:.3f}  {timing}  updates={run.n_updates}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    grid = parse_grid(args.grid)
    cfg = _base_config(args)
    series = _load_series(args)
    models = [m.strip() for m in args.model.split(",")] if args.model else [cfg.model]
    for m in models:
        if m not in MODELS:
            raise ConfigError(f"unknown model {m!r}; choose from {', '.join(MODELS)}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table = sweep(cfg, args.axis, grid, series, models=models, jobs=args.jobs)
    write_sweep_csv(table, out / "sweep.csv")
    failed = 0
    for row in table.rows:
        if row["status"] == "ok":
            print(f"{row['model']:<12} {args.axis}={row['value']:<4} RMSE {row['rmse']:.5f}  MAE% {row['mae_percent']:.3f}")
        else:
            failed += 1
            print(f"{row['model']:<12} {args.axis}={row['value']:<4} FAILED: {row['error']}")
    print(f"seed={cfg.seed} cells={len(table.rows)} failed={failed} -> {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.preset:
        profiles = preset_profiles()
        if args.preset not in profiles:
            raise UsageError(f"unknown preset {args.preset!r}; valid presets: {', '.join(profiles)}")
        params = profiles[args.preset]
        changes = {k: v for k, v in _synth_overrides(args).items() if v is not None}
        if changes:
            try:
                params = replace(params, **changes)
            except InvalidArgumentError as exc:
                raise UsageError(str(exc)) from None
        regime = args.preset
    else:
        if args.length is None:
            raise UsageError("synth needs --preset or --length")
        try:
            params = SynthParams(**{k: v for k, v in _synth_overrides(args).items() if v is not None})
        except InvalidArgumentError as exc:
            raise UsageError(str(exc)) from None
        regime = f"custom ({params.model})"
    series = synth_degradation(params, label=args.preset or "synth")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    nominal = PRESET_NOMINAL.get(args.preset, 1.0)
    with out.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# driftcast synth regime={regime} seed={params.seed} nominal_capacity={nominal}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cycle", "soh"])
        for c, v in zip(series.cycles.tolist(), series.values.tolist()):
            w.writerow([c, repr(v)])
    print(f"{len(series)} cycles, regime {regime}, seed {params.seed} -> {out}")
    return EXIT_OK


def _synth_overrides(args) -> dict:
    return {
        "length": args.length,
        "model": args.shape,
        "initial_soh": args.initial,
        "end_soh": args.end,
        "knee_position": args.knee_position,
        "knee_sharpness": args.knee_sharpness,
        "spike_rate": args.spike_rate,
        "spike_amplitude": args.spike_amplitude,
        "spike_decay": args.spike_decay,
        "noise_sigma": args.noise,
        "seed": args.seed,
    }


def _read_report(path: Path) -> dict:
    if path.is_dir():
        path = path / "report.json"
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError:
        raise DataError(f"cannot read {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None
    if doc.get("format", "").split("/")[0] != "driftcast.report":
        raise DataError(f"{path}: not a driftcast report")
    return doc


def report_rows(docs: list[dict]) -> list[dict]:
    rows = []
    ref = None
    for doc in docs:
        cfg = doc["config"]
        shape = (cfg["n"], cfg["h"])
        ref = ref or shape
        timing = doc.get("timing") or {}
        m = doc["metrics"]
        rows.append({
            "model": cfg["model"],
            "dataset": doc["series"]["label"],
            "strategy": cfg["strategy"],
            "n": cfg["n"],
            "h": cfg["h"],
            "seed": doc["seed"],
            "RMSE": m["rmse"],
            "MAE %": m["mae_percent"],
            "Time s/it": timing.get("mean_s_per_it"),
            "warning": "" if shape == ref else f"n/h {shape[0]}/{shape[1]} differ from {ref[0]}/{ref[1]}",
        })
    return rows


def cmd_report(args) -> int:
    docs = [_read_report(Path(p)) for p in args.runs]
    rows = report_rows(docs)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, REPORT_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)

    def fmt(v, spec):
        return "-".rjust(int(spec.split(".")[0])) if v is None else format(v, spec)

    print(f"{'model':<12}{'dataset':<18}{'strategy':<14}{'RMSE':>9}{'MAE %':>8}{'Time s/it':>11}")
    for r in rows:
        print(f"{r['model']:<12}{r['dataset']:<18}{r['strategy']:<14}{fmt(r['RMSE'], '9.5f')}"
              f"{fmt(r['MAE %'], '8.3f')}{fmt(r['Time s/it'], '11.4f')}  {r['warning']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="driftcast", description="Incremental multistep SoH forecasting with pseudo targets.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_flags(sp):
        sp.add_argument("--data", help="cycle/capacity CSV file")
        sp.add_argument("--schema", default="soh", choices=sorted(DATASET_SCHEMAS),
                        help="column layout of --data (default: soh, as written by 'synth')")
        sp.add_argument("--preset", help=f"synthetic preset: {', '.join(preset_profiles())}")

    def run_flags(sp):
        sp.add_argument("--config", help="YAML file with RunConfig keys")
        sp.add_argument("--out", required=True)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--strategy", choices=STRATEGIES)
        sp.add_argument("--n", type=int)
        sp.add_argument("--h", type=int)
        sp.add_argument("--no-timing", action="store_true", help="omit wall-clock columns (byte-reproducible output)")

    r = sub.add_parser("run", help="stream one series and score it")
    data_flags(r)
    run_flags(r)
    r.add_argument("--model", choices=sorted(MODELS))
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="sensitivity sweep over n or h")
    data_flags(s)
    run_flags(s)
    s.add_argument("--model", help="comma-separated models (default: config model)")
    s.add_argument("--axis", required=True, choices=("n", "h"))
    s.add_argument("--grid", required=True, help="e.g. 5,10,20,30 or 2..20:2")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    y = sub.add_parser("synth", help="write a synthetic degradation CSV")
    y.add_argument("--preset")
    y.add_argument("--out", required=True)
    y.add_argument("--seed", type=int)
    y.add_argument("--length", type=int)
    y.add_argument("--shape", choices=("linear", "exponential-knee"))
    y.add_argument("--initial", type=float)
    y.add_argument("--end", type=float)
    y.add_argument("--knee-position", type=float)
    y.add_argument("--knee-sharpness", type=float)
    y.add_argument("--spike-rate", type=float)
    y.add_argument("--spike-amplitude", type=float)
    y.add_argument("--spike-decay", type=float)
    y.add_argument("--noise", type=float)
    y.set_defaults(func=cmd_synth)

    t = sub.add_parser("report", help="merge report.json files into one comparison table")
    t.add_argument("runs", nargs="+", help="run directories or report.json files")
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    level = os.environ.get("DRIFTCAST_LOG", "WARNING").upper()
    logging.basicConfig(level=level if isinstance(logging.getLevelName(level), int) else "WARNING",
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"driftcast: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, InsufficientDataError, InvalidArgumentError) as exc:
        print(f"driftcast: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DriftcastError as exc:
        print(f"driftcast: run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        log.debug("unexpected failure", exc_info=True)
        print(f"driftcast: run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
