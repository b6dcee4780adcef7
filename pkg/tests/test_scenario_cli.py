import csv
import io
import subprocess
import sys

import pytest
import yaml

from isync import experiments
from isync.cli import main
from isync.scenario import ConfigError, dump_config, load_config, parse_config, with_value

MS = 1_000_000
TINY = {"seed": 4, "n_ues": 6, "scheme": "ce", "duration_ns": 300 * MS, "warmup_ns": 100 * MS,
        "cluster": {"ce_budget": 2, "area_m": 30.0}}


def write(tmp_path, data, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(data))
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------- config


def test_round_trip_materialises_defaults(tmp_path):
    cfg = load_config(write(tmp_path, TINY))
    again = parse_config(yaml.safe_load(dump_config(cfg)))
    assert again == cfg
    dumped = yaml.safe_load(dump_config(cfg))
    assert dumped["grid"]["n_blocks"] == 16
    assert dumped["sync"]["sqi_scaling"]


@pytest.mark.parametrize("bad,field", [
    ({"n_ues": 0}, "n_ues"),
    ({"grid": {"n_blocks": -1}}, "grid.n_blocks"),
    ({"sync": {"precison_target_ns": 5}}, "sync.precison_target_ns"),
    ({"scheme": "tdma"}, "scheme"),
    ({"experiment": {"kind": "sweep"}}, "experiment"),
])
def test_validation_reports_the_field(bad, field):
    with pytest.raises(ConfigError) as info:
        parse_config(bad)
    assert any(p.startswith(field) for p in info.value.problems)


def test_with_value_coerces_and_revalidates():
    cfg = parse_config(TINY)
    assert with_value(cfg, "n_ues", 12.0).n_ues == 12
    with pytest.raises(ConfigError):
        with_value(cfg, "n_ues", -3)


# ---------------------------------------------------------------- CLI


def test_validate_prints_full_config(tmp_path, capsys):
    assert main(["validate", str(write(tmp_path, TINY))]) == 0
    out = yaml.safe_load(capsys.readouterr().out)
    assert out["n_ues"] == 6 and "cluster" in out


def test_bad_config_exits_2_and_writes_nothing(tmp_path, capsys):
    out = tmp_path / "out"
    cfg = write(tmp_path, {**TINY, "n_ues": "many"})
    assert main(["run", str(cfg), "--out", str(out)]) == 2
    assert "n_ues" in capsys.readouterr().err
    assert not out.exists()
    assert main(["validate", str(tmp_path / "missing.yaml")]) == 2
    (tmp_path / "broken.yaml").write_text("seed: [1,\n")
    assert main(["run", str(tmp_path / "broken.yaml"), "--out", str(out)]) == 2
    assert not out.exists()


def test_unknown_axis_lists_sweepable(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["sweep", str(write(tmp_path, TINY)), "--axis", "colour", "--values", "1,2", "--out", str(out)])
    assert rc == 2
    err = capsys.readouterr().err
    assert "colour" in err and "n_ues" in err and "grid.n_blocks" in err
    assert not out.exists()


def test_run_writes_summary_and_trace(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", str(write(tmp_path, TINY)), "--out", str(out), "--trace"]) == 0
    printed = capsys.readouterr().out
    assert printed == (out / "summary.csv").read_text()
    rows = read_csv(out / "summary.csv")
    assert len(rows) == 1 and rows[0]["scheme"] == "ce"
    assert list(rows[0]) == experiments.SUMMARY_COLUMNS
    trace = read_csv(out / "trace.csv")
    assert trace and {r["message"] for r in trace} >= {"S1", "S2", "Comm"}


def test_seed_flag_overrides(tmp_path):
    cfg = write(tmp_path, TINY)
    assert main(["run", str(cfg), "--out", str(tmp_path / "a"), "--seed", "99"]) == 0
    assert read_csv(tmp_path / "a" / "summary.csv")[0]["seed"] == "99"


def test_sweep_two_values_two_rows_ordered(tmp_path):
    out = tmp_path / "out"
    rc = main(["sweep", str(write(tmp_path, TINY)), "--axis", "n_ues", "--values", "8,4", "--out", str(out)])
    assert rc == 0
    rows = read_csv(out / "sweep.csv")
    assert [r["n_ues"] for r in rows] == ["4", "8"]
    seeds = sorted(r["seed"] for r in read_csv(out / "summary.csv"))
    assert seeds == ["4", "5"]


def test_sweep_with_one_value_equals_run(tmp_path):
    cfg = write(tmp_path, TINY)
    main(["run", str(cfg), "--out", str(tmp_path / "run")])
    main(["sweep", str(cfg), "--axis", "n_ues", "--values", "6", "--out", str(tmp_path / "sw")])
    assert (tmp_path / "run" / "summary.csv").read_text() == (tmp_path / "sw" / "summary.csv").read_text()


def test_parallel_matches_serial(tmp_path):
    cfg = write(tmp_path, TINY)
    args = ["sweep", str(cfg), "--axis", "n_ues", "--values", "3,5,7", "--trace"]
    main(args + ["--out", str(tmp_path / "p1"), "--parallel", "1"])
    main(args + ["--out", str(tmp_path / "p3"), "--parallel", "3"])
    names = sorted(p.name for p in (tmp_path / "p1").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "p3").iterdir())
    for n in names:
        assert (tmp_path / "p1" / n).read_bytes() == (tmp_path / "p3" / n).read_bytes()


def test_grid_config_writes_heatmap(tmp_path):
    data = {**TINY, "experiment": {"kind": "grid", "schemes": ["separated", "hybrid"],
                                   "grid": {"precision_targets_ns": [1000, 500], "comm_latencies_ns": [10 * MS]}}}
    out = tmp_path / "out"
    assert main(["run", str(write(tmp_path, data)), "--out", str(out)]) == 0
    rows = read_csv(out / "heatmap.csv")
    assert len(rows) == 4
    base = [r for r in rows if r["scheme"] == "separated"]
    assert all(float(r["gain"]) == 0.0 for r in base)


def test_runtime_failure_exits_3(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("disk on fire")

    monkeypatch.setattr(experiments, "execute", boom)
    assert main(["run", str(write(tmp_path, TINY)), "--out", str(tmp_path / "o")]) == 3


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "isync", "validate", "minimal.smoke"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert yaml.safe_load(io.StringIO(res.stdout))["n_ues"] == 10
