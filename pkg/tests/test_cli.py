"""End-to-end tests of the command-line front end.

Every test drives ``gradbound.cli.main`` in-process with an isolated output
directory, then inspects the CSV artifacts and the run manifest.
"""

import csv
import json
import math
import os

import numpy as np
import pytest

from gradbound import __version__
from gradbound.cli import main, parse_int_range, parse_real_range
from gradbound.highfreq import (
    PeriodicFn,
    epsilon_n1_bound,
    landscape_quadrature,
)


def run_cli(*argv):
    return main(list(argv))


def read_csv(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def read_manifest(out_dir, name):
    with open(os.path.join(out_dir, name), "r", encoding="utf-8") as fh:
        return json.load(fh)


# -- range parsing --------------------------------------------------------


def test_parse_int_range_span():
    assert parse_int_range("4..6") == [4, 5, 6]


def test_parse_int_range_comma_list():
    assert parse_int_range("3,5,7") == [3, 5, 7]


def test_parse_int_range_mixed():
    assert parse_int_range("2,4..6,9") == [2, 4, 5, 6, 9]


def test_parse_int_range_reversed_span_rejected():
    with pytest.raises(ValueError, match="start exceeds end"):
        parse_int_range("6..4")


def test_parse_int_range_junk_rejected():
    with pytest.raises(ValueError):
        parse_int_range("3,x")


def test_parse_real_range_grid_includes_endpoint():
    assert parse_real_range("5:50:5") == pytest.approx(
        [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0]
    )


def test_parse_real_range_single_value():
    assert parse_real_range("7.5") == [7.5]


def test_parse_real_range_rejects_bad_shapes():
    with pytest.raises(ValueError, match="start:end:step"):
        parse_real_range("1:2")
    with pytest.raises(ValueError, match="step must be positive"):
        parse_real_range("0:10:0")
    with pytest.raises(ValueError, match="start exceeds end"):
        parse_real_range("9:1:1")


# -- epsilon-sweep ----------------------------------------------------------


SWEEP_ARGS = (
    "epsilon-sweep",
    "--q", "3",
    "--n", "2..4",
    "--a", "2..3",
    "--kind", "binary",
    "--l", "1..2",
    "--no-plot",
)


def test_epsilon_sweep_small_grid(tmp_path):
    out = str(tmp_path)
    assert run_cli(*SWEEP_ARGS, "--out", out) == 0
    header, rows = read_csv(os.path.join(out, "epsilon_sweep.csv"))
    assert header == [
        "q", "n", "l", "a", "kind", "space", "epsilon", "collision_prob",
        "pairs_evaluated",
    ]
    # n in {2,3,4} x a in {2,3} x l in {1,2}
    assert len(rows) == 12
    assert all(r[0] == "3" and r[4] == "binary" for r in rows)

    manifest = read_manifest(out, "epsilon_sweep_manifest.json")
    assert manifest["command"] == "epsilon-sweep"
    assert manifest["version"] == __version__
    assert manifest["rows"] == 12 and manifest["failures"] == 0
    assert manifest["config"]["threads_resolved"] >= 1
    assert manifest["config"]["seed"] == 0
    assert not os.path.exists(os.path.join(out, "epsilon_sweep.png"))


def test_epsilon_sweep_malformed_range_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run_cli(
            "epsilon-sweep", "--q", "3", "--n", "6..4", "--a", "2",
            "--kind", "binary", "--l", "1", "--out", str(tmp_path),
        )
    assert exc.value.code == 2


def test_epsilon_sweep_partial_grid_flags_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run_cli("epsilon-sweep", "--q", "3", "--out", str(tmp_path))
    assert exc.value.code == 2


def test_epsilon_sweep_work_cap_failure_exits_1(tmp_path, capsys):
    out = str(tmp_path)
    code = run_cli(
        "epsilon-sweep", "--q", "7", "--n", "9", "--a", "7",
        "--kind", "ternary", "--l", "4", "--max-work", "1e4",
        "--no-plot", "--out", out,
    )
    assert code == 1
    err = capsys.readouterr().err
    assert "1 cells failed" in err


# -- config files -----------------------------------------------------------


def test_config_file_supplies_flags(tmp_path):
    out = str(tmp_path / "out")
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# sweep configuration\n"
        "q = 3\n"
        "n = 2\n"
        "a = 2\n"
        "kind = binary\n"
        "l = 1\n"
        "no-plot = true\n",
        encoding="utf-8",
    )
    assert run_cli("epsilon-sweep", "--config", str(cfg), "--out", out) == 0
    _, rows = read_csv(os.path.join(out, "epsilon_sweep.csv"))
    assert len(rows) == 1 and rows[0][3] == "2"


def test_command_line_overrides_config(tmp_path):
    out = str(tmp_path / "out")
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "q = 3\nn = 2\na = 2\nkind = binary\nl = 1\nno-plot = true\n",
        encoding="utf-8",
    )
    assert run_cli("epsilon-sweep", "--config", str(cfg), "--a", "3", "--out", out) == 0
    _, rows = read_csv(os.path.join(out, "epsilon_sweep.csv"))
    assert len(rows) == 1 and rows[0][3] == "3"
    manifest = read_manifest(out, "epsilon_sweep_manifest.json")
    assert manifest["config"]["a"] == "3"


def test_unknown_config_key_exits_2(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("frobnicate = 1\n", encoding="utf-8")
    with pytest.raises(SystemExit) as exc:
        run_cli("epsilon-sweep", "--config", str(cfg), "--out", str(tmp_path))
    assert exc.value.code == 2


def test_malformed_config_line_exits_2(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("just some words\n", encoding="utf-8")
    with pytest.raises(SystemExit) as exc:
        run_cli("epsilon-sweep", "--config", str(cfg), "--out", str(tmp_path))
    assert exc.value.code == 2


def test_missing_config_file_exits_2(tmp_path, capsys):
    code = run_cli(
        "epsilon-sweep", "--config", str(tmp_path / "absent.cfg"),
        "--out", str(tmp_path),
    )
    assert code == 2
    assert "cannot read config" in capsys.readouterr().err


# -- bound-check / oracle-verify ---------------------------------------------


def test_bound_check_small_run(tmp_path):
    out = str(tmp_path)
    assert run_cli("bound-check", "--max-instances", "8", "--no-plot", "--out", out) == 0
    header, rows = read_csv(os.path.join(out, "bound_check.csv"))
    assert header == [
        "instance_id", "q", "n", "a", "kind", "loss", "space",
        "variance", "bound", "eps_term", "gamma", "slack",
    ]
    assert len(rows) == 8
    assert rows[0][0] == "i000" and rows[7][0] == "i007"
    for r in rows:
        assert float(r[11]) >= 0.0  # bound minus variance never negative
    manifest = read_manifest(out, "bound_check_manifest.json")
    assert manifest["instances"] == 8 and manifest["violations"] == 0


def test_bound_check_tight_witness(tmp_path, capsys):
    out = str(tmp_path)
    assert run_cli("bound-check", "--tight-witness", "--no-plot", "--out", out) == 0
    text = capsys.readouterr().out
    assert "slack=0" in text
    manifest = read_manifest(out, "bound_check_manifest.json")
    assert manifest["config"]["tight_witness"] is True
    assert manifest["tight_witness_slack"] == 0.0


def test_oracle_verify_prints_per_instance_lines(tmp_path, capsys):
    out = str(tmp_path)
    assert run_cli("oracle-verify", "--max-instances", "3", "--no-plot", "--out", out) == 0
    text = capsys.readouterr().out
    for tag in ("[i000]", "[i001]", "[i002]"):
        assert tag in text
    assert text.count(" ok") >= 3
    manifest = read_manifest(out, "oracle_verify_manifest.json")
    assert manifest["command"] == "oracle-verify"


# -- regress ------------------------------------------------------------------


def test_regress_reads_sweep_csv(tmp_path):
    sweep_out = str(tmp_path / "sweep")
    assert run_cli(*SWEEP_ARGS, "--out", sweep_out) == 0
    fit_out = str(tmp_path / "fit")
    code = run_cli(
        "regress", "--in", os.path.join(sweep_out, "epsilon_sweep.csv"),
        "--no-plot", "--out", fit_out,
    )
    assert code == 0

    header, rows = read_csv(os.path.join(fit_out, "regression_fits.csv"))
    assert header == ["model", "beta0", "beta1", "beta2", "t0", "t1", "t2", "R2", "nrows"]
    assert [r[0] for r in rows] == ["without_log_a", "with_log_a"]

    manifest = read_manifest(fit_out, "regress_manifest.json")
    assert manifest["r2_with_log_a"] >= manifest["r2_without_log_a"]
    assert manifest["rows_used"] == 12

    sheader, srows = read_csv(os.path.join(fit_out, "regression_scatter.csv"))
    assert sheader == ["log_H", "neg_log_eps", "a"]
    assert len(srows) == 12


# -- landscape ------------------------------------------------------------------


def test_landscape_series_row_count_and_manifest(tmp_path):
    out = str(tmp_path)
    code = run_cli(
        "landscape", "--w", "10", "--omega", "0:10:0.5", "--order", "60",
        "--no-plot", "--out", out,
    )
    assert code == 0
    header, rows = read_csv(os.path.join(out, "landscape.csv"))
    assert header == ["omega", "C_h"]
    assert len(rows) == 21
    assert float(rows[0][0]) == 0.0 and float(rows[-1][0]) == 10.0
    manifest = read_manifest(out, "landscape_manifest.json")
    assert manifest["rows"] == 21 and manifest["series_order"] == 60


def test_landscape_quadrature_method_matches_library(tmp_path):
    out = str(tmp_path)
    code = run_cli(
        "landscape", "--w", "10", "--omega", "0:5:1", "--method", "quadrature",
        "--no-plot", "--out", out,
    )
    assert code == 0
    _, rows = read_csv(os.path.join(out, "landscape.csv"))
    psi = PeriodicFn.sawtooth()
    for r in rows:
        want = landscape_quadrature(psi, 10.0, float(r[0]))
        assert float(r[1]) == want  # repr round-trip is exact
    manifest = read_manifest(out, "landscape_manifest.json")
    assert manifest["series_order"] is None


def test_landscape_malformed_omega_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run_cli("landscape", "--omega", "0:10", "--out", str(tmp_path))
    assert exc.value.code == 2


# -- highfreq-bound ------------------------------------------------------------


def test_highfreq_bound_rows_match_library(tmp_path):
    out = str(tmp_path)
    code = run_cli(
        "highfreq-bound", "--R", "5:15:5", "--H-max", "50",
        "--no-plot", "--out", out,
    )
    assert code == 0
    header, rows = read_csv(os.path.join(out, "highfreq_bound.csv"))
    assert header == ["R", "H_star", "bracket", "bound"]
    assert len(rows) == 3
    psi = PeriodicFn.sawtooth()
    for r in rows:
        eb = epsilon_n1_bound(psi, 0.3, 0.7, float(r[0]), H_max=50)
        assert int(r[1]) == eb.h_star
        assert float(r[2]) == eb.bracket and float(r[3]) == eb.value


# -- discrepancy ----------------------------------------------------------------


def test_discrepancy_single_centre_point(tmp_path):
    pts = tmp_path / "points.csv"
    pts.write_text("x,y\n0.5,0.5\n", encoding="utf-8")
    out = str(tmp_path / "out")
    assert run_cli("discrepancy", "--in", str(pts), "--no-plot", "--out", out) == 0
    header, rows = read_csv(os.path.join(out, "discrepancy.csv"))
    assert header == ["n_points", "d_star"]
    assert rows == [["1", "0.75"]]


def test_discrepancy_rejects_wrong_header(tmp_path):
    pts = tmp_path / "points.csv"
    pts.write_text("u,v\n0.5,0.5\n", encoding="utf-8")
    with pytest.raises(SystemExit) as exc:
        run_cli("discrepancy", "--in", str(pts), "--out", str(tmp_path / "out"))
    assert exc.value.code == 2


def test_discrepancy_rejects_out_of_range_point(tmp_path):
    pts = tmp_path / "points.csv"
    pts.write_text("x,y\n0.5,1.5\n", encoding="utf-8")
    with pytest.raises(SystemExit) as exc:
        run_cli("discrepancy", "--in", str(pts), "--no-plot", "--out", str(tmp_path / "out"))
    assert exc.value.code == 2  # invalid input file is a usage error


# -- figures ------------------------------------------------------------------


def test_png_rendered_unless_no_plot(tmp_path):
    with_plot = str(tmp_path / "a")
    without = str(tmp_path / "b")
    args = ("landscape", "--w", "10", "--omega", "0:5:1", "--order", "40")
    assert run_cli(*args, "--out", with_plot) == 0
    assert run_cli(*args, "--no-plot", "--out", without) == 0
    png = os.path.join(with_plot, "landscape.png")
    assert os.path.exists(png) and os.path.getsize(png) > 1000
    assert not os.path.exists(os.path.join(without, "landscape.png"))


# -- determinism ----------------------------------------------------------------


def test_sweep_csv_identical_across_thread_counts(tmp_path):
    blobs = []
    for threads in (1, 4):
        out = str(tmp_path / f"t{threads}")
        assert run_cli(*SWEEP_ARGS, "--threads", str(threads), "--out", out) == 0
        with open(os.path.join(out, "epsilon_sweep.csv"), "rb") as fh:
            blobs.append(fh.read())
    assert blobs[0] == blobs[1]


def test_version_flag_reports_package_version(capsys):
    with pytest.raises(SystemExit) as exc:
        run_cli("--version")
    assert exc.value.code == 0
    assert f"gradbound {__version__}" in capsys.readouterr().out
