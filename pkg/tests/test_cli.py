import csv
import json

import pytest

from driftcast.cli import REPORT_COLUMNS, main, parse_grid
from driftcast.evaluation import SWEEP_COLUMNS, TRACE_COLUMNS
from driftcast.forecasters import CHECKPOINT_FORMAT


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(line for line in fh if not line.startswith("#")))


def test_parse_grid():
    assert parse_grid("5,10,20") == [5, 10, 20]
    assert parse_grid("2..20:2") == list(range(2, 21, 2)) and len(parse_grid("2..20:2")) == 10
    assert parse_grid("1..3,7") == [1, 2, 3, 7]


def test_run_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", "--preset", "smooth-long", "--out", str(out)]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["config"]["n"] == 10 and doc["config"]["h"] == 30 and doc["seed"] == 0
    assert doc["series"] == {"label": "smooth-long", "length": 1224, "nominal_capacity": 1.1}
    assert doc["warmup_length"] == 306 and doc["n_updates"] == 1224 - 306
    assert set(doc["timing"]) == {"mean_s_per_it", "median_s_per_it"}
    rows = read_csv(out / "traces.csv")
    assert tuple(rows[0]) == TRACE_COLUMNS and len(rows) == 1 + 1224 - 306
    ckpt = json.loads((out / "model.json").read_text())
    assert ckpt["format"] == CHECKPOINT_FORMAT and ckpt["model"] == "mlp"
    text = capsys.readouterr().out
    assert "RMSE" in text and "MAE%" in text and "s/it" in text and "seed=0" in text


def test_run_from_data_file_with_config(tmp_path):
    data = tmp_path / "s.csv"
    assert main(["synth", "--preset", "irregular-short", "--out", str(data)]) == 0
    cfg = tmp_path / "c.yaml"
    cfg.write_text("model: rnn\nstrategy: pseudo-gamma\nseed: 4\n")
    out = tmp_path / "run"
    assert main(["run", "--data", str(data), "--config", str(cfg), "--out", str(out), "--h", "20"]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert (doc["config"]["model"], doc["config"]["strategy"], doc["seed"], doc["config"]["h"]) == ("rnn", "pseudo-gamma", 4, 20)
    assert doc["series"]["length"] == 168


def test_missing_config_exit_1(tmp_path, capsys):
    missing = tmp_path / "nope.yaml"
    assert main(["run", "--preset", "smooth-short", "--config", str(missing), "--out", str(tmp_path / "o")]) == 1
    assert str(missing) in capsys.readouterr().err


def test_bad_data_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("cycle,soh\n1,0.9\n2,x\n")
    assert main(["run", "--data", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "row 3" in capsys.readouterr().err


def test_too_short_exit_2(tmp_path):
    data = tmp_path / "s.csv"
    main(["synth", "--length", "60", "--out", str(data)])
    assert main(["run", "--data", str(data), "--out", str(tmp_path / "o")]) == 2


def test_argparse_errors_exit_1(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--preset", "smooth-short", "--out", str(tmp_path), "--strategy", "bogus"])
    assert exc.value.code == 1


def test_frozen_reports_zero_updates(tmp_path):
    out = tmp_path / "f"
    assert main(["run", "--preset", "smooth-short", "--strategy", "frozen", "--out", str(out)]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["n_updates"] == 0 and doc["notes"] == ["no model updates were performed"]


def test_sweep_h(tmp_path):
    out = tmp_path / "sw"
    args = ["sweep", "--preset", "irregular-short", "--axis", "h", "--grid", "2,4,6,8,10,12",
            "--model", "mlp,persistence", "--out", str(out)]
    assert main(args) == 0
    rows = read_csv(out / "sweep.csv")
    assert tuple(rows[0]) == SWEEP_COLUMNS
    body = rows[1:]
    assert sum(r[2] == "mlp" for r in body) == 6 and sum(r[2] == "persistence" for r in body) == 6
    assert all(r[11] == "ok" for r in body)


def test_sweep_range_grid(tmp_path):
    out = tmp_path / "sw"
    assert main(["sweep", "--preset", "irregular-short", "--axis", "n", "--grid", "2..20:2",
                 "--h", "5", "--model", "linear", "--out", str(out)]) == 0
    assert len(read_csv(out / "sweep.csv")) == 11


@pytest.mark.parametrize("grid", ["", ",", "5..2", "a"])
def test_sweep_bad_grid_exit_1(tmp_path, grid):
    assert main(["sweep", "--preset", "irregular-short", "--axis", "h", "--grid", grid, "--out", str(tmp_path)]) == 1


def test_sweep_unknown_model_exit_1(tmp_path):
    assert main(["sweep", "--preset", "irregular-short", "--axis", "h", "--grid", "5", "--model", "mlp,arima",
                 "--out", str(tmp_path)]) == 1


def test_synth_preset(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["synth", "--preset", "smooth-short", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# driftcast synth regime=smooth-short seed=21")
    assert lines[1] == "cycle,soh" and len(lines) == 2 + 557


def test_synth_seed_is_reproducible(tmp_path):
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    for p, seed in ((a, "7"), (b, "7"), (c, "8")):
        assert main(["synth", "--preset", "irregular-short", "--seed", seed, "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes() != c.read_bytes()


def test_synth_custom(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["synth", "--length", "40", "--shape", "linear", "--initial", "1.0", "--end", "0.9",
                 "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 41 and float(rows[1][1]) == 1.0 and float(rows[-1][1]) == pytest.approx(0.9)


def test_synth_errors_exit_1(tmp_path):
    assert main(["synth", "--preset", "bogus", "--out", str(tmp_path / "x.csv")]) == 1
    assert main(["synth", "--out", str(tmp_path / "x.csv")]) == 1
    assert main(["synth", "--length", "10", "--end", "1.2", "--out", str(tmp_path / "x.csv")]) == 1


def test_report_merges_runs(tmp_path, capsys):
    runs = []
    for i, (model, strategy) in enumerate([(m, s) for m in ("mlp", "persistence", "linear")
                                           for s in ("pseudo", "pseudo-gamma", "delayed", "frozen")]):
        out = tmp_path / f"r{i}"
        assert main(["run", "--preset", "irregular-short", "--model", model, "--strategy", strategy,
                     "--out", str(out)]) == 0
        runs.append(str(out))
    extra = tmp_path / "odd"
    assert main(["run", "--preset", "irregular-short", "--h", "5", "--out", str(extra)]) == 0
    table = tmp_path / "table.csv"
    assert main(["report", *runs, "--out", str(table)]) == 0
    rows = read_csv(table)
    assert tuple(rows[0]) == REPORT_COLUMNS and len(rows) == 13
    assert all(r[9] == "" for r in rows[1:])
    assert main(["report", runs[0], str(extra / "report.json"), "--out", str(table)]) == 0
    rows = read_csv(table)
    assert rows[2][9].startswith("n/h 10/5")
    assert "RMSE" in capsys.readouterr().out


def test_report_rejects_non_report(tmp_path):
    bogus = tmp_path / "x.json"
    bogus.write_text('{"hello": 1}')
    assert main(["report", str(bogus), "--out", str(tmp_path / "t.csv")]) == 2


def test_log_level_env(tmp_path, monkeypatch):
    monkeypatch.setenv("DRIFTCAST_LOG", "nonsense")
    assert main(["synth", "--preset", "smooth-short", "--out", str(tmp_path / "s.csv")]) == 0
