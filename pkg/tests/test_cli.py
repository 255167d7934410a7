"""Tests for the command-line front end."""

import csv
import json

import pytest

from hexstab.cli import _parse_grid, main

TINY_MESH = ("--nx", "2", "--ny", "1", "--nz", "1", "--load-steps", "2")


def read_csv(path):
    with open(path, newline="") as stream:
        return list(csv.DictReader(stream))


def run_main(argv):
    return main(list(argv))


def test_parse_grid():
    assert _parse_grid("0:1:5") == (0.0, 0.25, 0.5, 0.75, 1.0)
    assert _parse_grid("0.3:0.9:1") == (0.3,)
    with pytest.raises(ValueError):
        _parse_grid("0:1")
    with pytest.raises(ValueError):
        _parse_grid("0:1:0")


def test_linear_distortion_run_writes_csv_and_summary(tmp_path, capsys):
    out = tmp_path / "lin.csv"
    code = run_main(["linear-distortion", "--d", "0.2", "--out", str(out)])
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 6
    assert set(rows[0]) == {"scheme", "d", "U_r", "U_r_rel", "status"}
    assert all(row["status"] == "ok" for row in rows)
    summary = json.loads(capsys.readouterr().out)
    assert summary["study"] == "linear-distortion"
    assert summary["rows"] == 6
    assert summary["failed"] == 0
    assert summary["csv"] == str(out)
    assert summary["wall_time"] >= 0.0


def test_failed_rows_exit_with_code_two(tmp_path, capsys):
    out = tmp_path / "hg.csv"
    code = run_main(["cantilever", "--scheme", "one-point",
                     *TINY_MESH, "--out", str(out)])
    assert code == 2
    rows = read_csv(out)
    assert len(rows) == 1
    assert rows[0]["status"] == "SolveFailure"
    summary = json.loads(capsys.readouterr().out)
    assert summary["failed"] == summary["rows"] == 1


def test_usage_errors_exit_with_code_one():
    with pytest.raises(SystemExit) as excinfo:
        run_main(["torsion"])
    assert excinfo.value.code == 1
    with pytest.raises(SystemExit) as excinfo:
        run_main(["nu-sweep", "--nu", "0.3", "--nu-grid", "0.3:0.4:2"])
    assert excinfo.value.code == 1


def test_invalid_grid_reports_error(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code = run_main(["distortion", "--d-grid", "0:1", "--out", str(out)])
    assert code == 1
    assert "error" in capsys.readouterr().err
    assert not out.exists()


def test_unknown_scheme_reports_error(tmp_path, capsys):
    code = run_main(["cantilever", "--scheme", "2p-stab",
                     "--out", str(tmp_path / "x.csv")])
    assert code == 1
    assert "2p-stab" in capsys.readouterr().err


def test_config_with_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    code = run_main(["cantilever", "--config", str(cfg)])
    assert code == 1
    assert "unknown keys" in capsys.readouterr().err


def test_config_invalid_json(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("not json {")
    code = run_main(["cantilever", "--config", str(cfg)])
    assert code == 1
    assert "not valid JSON" in capsys.readouterr().err


def test_config_missing_file(tmp_path, capsys):
    code = run_main(
        ["cantilever", "--config", str(tmp_path / "absent.json")])
    assert code == 1
    assert "cannot read config" in capsys.readouterr().err


def test_config_fields_with_flag_override(tmp_path, capsys):
    """Flags win over config values; untouched config fields apply."""
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "counts": [2, 1, 1],
        "schemes": ["1p-stab"],
        "load_steps": 2,
        "refine_levels": 0,
    }))
    out = tmp_path / "refine.csv"
    code = run_main(["refine", "--config", str(cfg), "--nx", "4",
                     "--out", str(out)])
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 1
    assert rows[0]["scheme"] == "1p-stab"
    assert rows[0]["n_elements"] == "4"
    capsys.readouterr()


def test_refine_levels_flag(tmp_path, capsys):
    out = tmp_path / "refine.csv"
    code = run_main(["refine", "--refine-levels", "1",
                     "--scheme", "1p-stab", *TINY_MESH, "--out", str(out)])
    assert code == 0
    rows = read_csv(out)
    assert [row["level"] for row in rows] == ["0", "1"]
    assert [row["n_elements"] for row in rows] == ["2", "16"]
    capsys.readouterr()
