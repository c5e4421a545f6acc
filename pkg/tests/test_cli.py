import csv
import io
import json
import math
from pathlib import Path

import pytest

from geoleo import __version__
from geoleo.cli import EXIT_GATE, EXIT_OK, EXIT_POINT_FAILED, EXIT_USAGE, main
from geoleo.config import default_run_config, parse_config, parse_config_text
from geoleo.sweep import PLOT_COLUMNS, apply_sweep_value, columns_for, plot_data_text, run_sweep, to_csv
from geoleo.scenario import GEO, LEO

GOLDEN = Path(__file__).resolve().parent / "golden"
CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def _write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


@pytest.mark.parametrize("mode", ["analytic", "montecarlo", "validate"])
def test_csv_header_golden(mode):
    expected = (GOLDEN / f"{mode}_tau_db_header.csv").read_text().strip()
    assert ",".join(columns_for(mode, "tau_db")) == expected


def test_analytic_cli_stdout(capsys):
    assert main(["analytic"]) == EXIT_OK
    out = capsys.readouterr().out
    rows = _rows(out)
    assert out.splitlines()[0] == (GOLDEN / "analytic_tau_db_header.csv").read_text().strip()
    assert [float(r["tau_db"]) for r in rows] == [-10, -5, 0, 5, 10, 15, 20]
    assert all(r["error"] == "" for r in rows)
    assert float(rows[0]["p_vis_leo"]) == pytest.approx(0.9864209367, abs=1e-9)


def test_outputs_written_together(tmp_path, capsys):
    out = tmp_path / "sub" / "cov.csv"
    assert main(["analytic", "--out", str(out)]) == EXIT_OK
    dat = tmp_path / "sub" / "cov.dat"
    man = tmp_path / "sub" / "cov.csv.manifest.json"
    assert out.exists() and dat.exists() and man.exists()
    meta = json.loads(man.read_text())
    assert meta["version"] == __version__
    assert meta["mode"] == "analytic"
    assert len(meta["per_point_runtime_s"]) == 7
    assert meta["config"]["geo.altitude_km"] == 35786.0
    assert meta["command"].startswith("geoleo analytic")
    # the manifest config reproduces the run
    text = "\n".join(f"{k} = {', '.join(map(repr, v)) if isinstance(v, list) else v}" for k, v in meta["config"].items())
    assert parse_config_text(text) == default_run_config()


def test_plot_data_scenarios(tmp_path):
    run = parse_config_text("terminal.rx_gain_db = 60\nsweep.grid = -5, 0, 5")
    result = run_sweep(run, "analytic")
    text = plot_data_text(result)
    assert "# columns: " + " ".join(PLOT_COLUMNS) in text
    data = [line.split() for line in text.splitlines() if line and not line.startswith("#")]
    scenarios = {row[0] for row in data}
    assert {"hybrid", "geo_only", "leo_only"} <= scenarios
    assert all(len(row) == len(PLOT_COLUMNS) for row in data)
    hybrid = [float(r[2]) for r in data if r[0] == "hybrid"]
    assert hybrid == pytest.approx([float(v) for v in result.column("p_cov_total")])
    assert all(r[3] == "nan" for r in data)
    assert plot_data_text(result) == plot_data_text(run_sweep(run, "analytic"))


def test_unwritable_output_names_path(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["analytic", "--out", str(blocker / "x.csv")]) == EXIT_USAGE
    assert str(blocker) in capsys.readouterr().err


def test_config_errors_exit_2(tmp_path, capsys):
    cfg = _write(tmp_path, "channel.nakagami_m = 2.5\n")
    assert main(["analytic", "--config", str(cfg)]) == EXIT_USAGE
    assert "channel.nakagami_m" in capsys.readouterr().err
    with pytest.raises(SystemExit) as info:
        main(["montecarlo", "--seed", "-1"])
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        main(["montecarlo", "--seed", str(2**64)])


def test_montecarlo_seed_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["montecarlo", "--seed", "42", "--trials", "20000"]
    assert main(args + ["--out", str(a)]) == EXIT_OK
    assert main(args + ["--out", str(b), "--workers", "2"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    rows = _rows(a.read_text())
    assert rows[0]["n_trials"] == "20000"
    assert float(rows[0]["p_vis_leo_se"]) > 0


def test_latitude_sweep_geo_association_vanishes(capsys):
    run = parse_config((CONFIGS / "association_vs_latitude.cfg"))
    rows = run_sweep(run, "analytic").rows
    for r in rows:
        lat = r["latitude_deg"]
        if abs(lat) > 81.3:
            assert r["p_assc_geo"] == 0.0 and r["p_vis_geo"] == 0.0
        else:
            assert r["p_assc_geo"] > 0.5
        assert r["p_assc_geo"] + r["p_assc_leo"] == pytest.approx(1.0, abs=1e-6)


def test_empty_leo_total_is_geo_branch():
    run = parse_config_text("leo.count = 0\nterminal.rx_gain_db = 60\nsweep.grid = -5, 5")
    for r in run_sweep(run, "analytic").rows:
        assert r["p_cov_total"] == pytest.approx(r["p_vis_geo"] * r["p_cov_nocross_geo"], rel=1e-12)


def test_point_failures_recorded_in_row(tmp_path, capsys):
    # a bias sweep with an absurd ratio overflows only at the last point
    cfg = _write(tmp_path, "sweep.variable = bias_ratio_db\nsweep.grid = 0, 10, 4000\n")
    out = tmp_path / "b.csv"
    assert main(["analytic", "--config", str(cfg), "--out", str(out)]) == EXIT_POINT_FAILED
    rows = _rows(out.read_text())
    assert [r["error"] == "" for r in rows] == [True, True, False]
    assert rows[2]["p_vis_geo"] == ""
    assert "4000" in capsys.readouterr().err


def test_sweep_variables_apply():
    base = default_run_config().scenario
    c, t = apply_sweep_value(base, "tau_db", 7.0, 0.0)
    assert c is base and t == 7.0
    c, _ = apply_sweep_value(base, "latitude_deg", 30.0, 0.0)
    assert c.terminal.latitude == pytest.approx(math.radians(30.0))
    c, _ = apply_sweep_value(base, "bias_ratio_db", 10.0, 0.0)
    assert c.geo.link.bias / c.leo.link.bias == pytest.approx(10.0)
    c, _ = apply_sweep_value(base, "leo_count", 500.0, 0.0)
    assert c.leo.density == pytest.approx(5 * base.leo.density)
    c, _ = apply_sweep_value(base, "geo_count", 10.0, 0.0)
    assert c.geo.density == pytest.approx(base.geo.density / 100)
    c, _ = apply_sweep_value(base, "pathloss_ratio", 1.2, 0.0)
    assert c.geo.link.pathloss_exp == pytest.approx(3.6)


def test_sweep_rows_in_grid_order_with_workers():
    run = parse_config_text("sweep.variable = latitude_deg\nsweep.grid = 80, 40, 0, -40")
    serial = run_sweep(run, "analytic")
    pooled = run_sweep(run, "analytic", workers=3)
    assert to_csv(serial) == to_csv(pooled)
    assert [r["latitude_deg"] for r in pooled.rows] == [80.0, 40.0, 0.0, -40.0]


def test_validate_gate(tmp_path, capsys):
    loud = "terminal.rx_gain_db = 60\nsweep.grid = -5, 0, 5\n"
    ok = _write(tmp_path, loud + "analysis.association = joint\n", "ok.cfg")
    assert main(["validate", "--config", str(ok), "--trials", "30000", "--seed", "3"]) == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    for r in rows:
        assert float(r["z_max"]) <= 4.0
        assert abs(float(r["p_cov_total_analytic"]) - float(r["p_cov_total_mc"])) < 0.03
    bad = _write(tmp_path, loud + "analysis.association = marginal\n", "bad.cfg")
    assert main(["validate", "--config", str(bad), "--trials", "30000", "--seed", "3"]) == EXIT_GATE
    assert "FAIL" in capsys.readouterr().err
    # same data, looser threshold: the gate opens
    loose = _write(tmp_path, loud + "analysis.association = marginal\nanalysis.z_threshold = 1e6\n", "loose.cfg")
    assert main(["validate", "--config", str(loose), "--trials", "30000", "--seed", "3"]) == EXIT_OK


def test_sweep_subcommand_uses_config_mode(tmp_path, capsys):
    cfg = _write(tmp_path, "sweep.mode = montecarlo\nsweep.grid = 0\n")
    assert main(["sweep", "--config", str(cfg), "--trials", "1000"]) == EXIT_OK
    assert "p_vis_geo_se" in capsys.readouterr().out.splitlines()[0]


def test_dump_config_roundtrip(tmp_path, capsys):
    assert main(["dump-config", "--config", str(CONFIGS / "association_vs_latitude.cfg")]) == EXIT_OK
    text = capsys.readouterr().out
    assert parse_config_text(text) == parse_config(CONFIGS / "association_vs_latitude.cfg")


def test_nan_cells_are_empty():
    run = parse_config_text("terminal.latitude_deg = 85\nsweep.grid = 0")
    result = run_sweep(run, "montecarlo", trials=1000)
    row = _rows(to_csv(result))[0]
    # no snapshot has both types visible, so the conditional estimates are undefined
    assert row["p_vis_geo"] == "0"
    assert row["p_assc_geo"] == "" and row["p_cov_geo"] == ""
