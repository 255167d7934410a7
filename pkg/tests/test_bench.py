"""Tests for the benchmark studies, their material and the CSV output."""

import dataclasses
import math

import numpy as np
import pytest

from hexstab.bench import (
    CSV_COLUMNS,
    DEFAULT_SCHEMES,
    STUDIES,
    StudyRow,
    StudySpec,
    StudyTable,
    bench_material,
    emit_csv,
    run_study,
)
from hexstab.material import d_matrix, stress_and_tangent

IDENTITY_C = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])

TINY = dict(counts=(2, 1, 1), load_steps=2)

# Tip deflections of the tiny cantilever, solved once and pinned to
# guard against silent behaviour changes.
TINY_TIPS = {
    "full": -1.343804e-01,
    "1p-vol": -1.639895e-01,
    "1p-stab": -1.393326e-01,
    "1p-stab-iso": -1.666407e-01,
}


@pytest.fixture(scope="module")
def tiny_cantilever():
    return run_study(StudySpec("cantilever", **TINY))


def test_bench_material_recovers_linear_elasticity():
    """The large-deformation tangent at zero strain equals the
    small-strain moduli of the same (E, nu)."""
    for nu in (0.3, 0.33, 0.45):
        params = bench_material(200e9, nu)
        l_mat = stress_and_tangent(IDENTITY_C, params).l
        d_mat = d_matrix(params)
        assert np.abs(l_mat - d_mat).max() <= 1e-12 * np.abs(d_mat).max()


def test_bench_material_caps_bulk_modulus():
    e = 200e9
    params = bench_material(e, 0.495)
    assert params.K == e / (3.0 * (1.0 - 2.0 * 0.495))
    params = bench_material(e, 0.499)
    mu = e / (2.0 * (1.0 + 0.499))
    assert params.K == 100.0 * mu
    assert params.K < e / (3.0 * (1.0 - 2.0 * 0.499))
    assert params.K2 == 0.0
    assert params.K1 == 0.5 * mu


def test_spec_validation():
    with pytest.raises(ValueError):
        StudySpec("torsion")
    with pytest.raises(ValueError):
        StudySpec("cantilever", schemes=("2p-stab",))
    spec = StudySpec("linear-distortion", schemes=("1p-vol",))
    with pytest.raises(ValueError):
        spec.resolved_schemes()


def test_default_schemes_and_newton_config():
    for study in STUDIES:
        assert study in DEFAULT_SCHEMES
        assert study in CSV_COLUMNS
    quartet = ("full", "1p-vol", "1p-stab", "1p-stab-iso")
    assert DEFAULT_SCHEMES["cantilever"] == quartet
    assert DEFAULT_SCHEMES["distortion"] == quartet + (
        "1p-stab-constj", "1p-stab-iso-constj")
    assert DEFAULT_SCHEMES["linear-distortion"] == (
        "full", "1p-stab", "1p-stab-constj")
    cfg = StudySpec("cantilever", load_steps=7).newton_config()
    assert cfg.rel_tol == 1e-6
    assert cfg.max_iterations == 100
    assert cfg.load_steps == 7


def test_cantilever_runs_default_quartet(tiny_cantilever):
    table = tiny_cantilever
    assert table.study == "cantilever"
    assert [row.scheme for row in table.rows] == list(
        DEFAULT_SCHEMES["cantilever"])
    assert table.failed_rows == ()
    for row in table.rows:
        assert row.ok
        assert row.sweep == 0
        assert row.n_elements == 2
        assert row.u_tip_z < 0.0
        assert row.u_r >= abs(row.u_tip_z)
        assert row.newton_iters > 0
        assert row.wall_time > 0.0


def test_cantilever_tip_values_are_stable(tiny_cantilever):
    for row in tiny_cantilever.rows:
        expected = TINY_TIPS[row.scheme]
        assert row.u_tip_z == pytest.approx(expected, rel=1e-4), row.scheme


def test_refine_orders_rows_scheme_major():
    table = run_study(StudySpec(
        "refine", schemes=("full", "1p-stab"), refine_levels=1, **TINY))
    assert [row.scheme for row in table.rows] == [
        "full", "full", "1p-stab", "1p-stab"]
    assert [row.sweep for row in table.rows] == [0, 1, 0, 1]
    assert [row.n_elements for row in table.rows] == [2, 16, 2, 16]
    for coarse, fine in (table.rows[:2], table.rows[2:]):
        assert abs(fine.u_tip_z) > abs(coarse.u_tip_z)


def test_load_sweep_is_monotone():
    table = run_study(StudySpec(
        "load-sweep", schemes=("full",), load_grid=(0.5, 1.0), **TINY))
    half, full = table.rows
    assert half.sweep == 0.5
    assert abs(half.u_tip_z) < abs(full.u_tip_z)
    assert half.u_tip_z == pytest.approx(-7.078182e-02, rel=1e-4)


def test_nu_sweep_point_matches_cantilever(tiny_cantilever):
    """The nu sweep at the cantilever's own ratio reproduces the
    cantilever solve exactly."""
    table = run_study(StudySpec(
        "nu-sweep", schemes=("1p-stab",), nu_grid=(0.33,), **TINY))
    row = table.rows[0]
    reference = next(
        r for r in tiny_cantilever.rows if r.scheme == "1p-stab")
    assert row.u_tip_z == reference.u_tip_z
    assert row.sweep == 0.33


def test_nu_sweep_stiffens_toward_incompressibility():
    table = run_study(StudySpec(
        "nu-sweep", schemes=("full",), nu_grid=(0.33, 0.45, 0.49), **TINY))
    tips = [abs(row.u_tip_z) for row in table.rows]
    assert tips[0] > tips[1] > tips[2]


def test_distortion_reports_relative_loss():
    table = run_study(StudySpec(
        "distortion", schemes=("full", "1p-stab", "1p-stab-constj"),
        d_grid=(0.0, 0.15), **TINY))
    assert len(table.rows) == 6
    by_scheme = {}
    for row in table.rows:
        assert row.ok
        by_scheme.setdefault(row.scheme, []).append(row)
    for rows in by_scheme.values():
        base, bent = rows
        assert base.sweep == 0.0
        assert base.u_r_rel == 0.0
        assert bent.u_r_rel == 1.0 - bent.u_r / base.u_r


def test_one_point_failure_keeps_its_row():
    """The hourglass singularity is reported, not raised, so sweeps
    with a failing scheme still complete."""
    table = run_study(StudySpec(
        "cantilever", schemes=("one-point",), **TINY))
    assert len(table.rows) == 1
    row = table.rows[0]
    assert not row.ok
    assert row.status == "SolveFailure"
    assert math.isnan(row.u_tip_z)
    assert math.isnan(row.u_r)
    assert table.failed_rows == (row,)


def test_linear_distortion_study():
    """The small-strain sweep runs without Newton iterations and shows
    the frozen-Jacobian distortion penalty."""
    table = run_study(StudySpec("linear-distortion", d_grid=(0.0, 0.2)))
    assert len(table.rows) == 6
    rels = {}
    for row in table.rows:
        assert row.ok
        assert row.newton_iters == 0
        if row.sweep == 0.2:
            rels[row.scheme] = row.u_r_rel
    assert rels["1p-stab-constj"] > rels["full"]
    assert rels["full"] <= 0.1


def test_study_runs_are_deterministic():
    spec = StudySpec("cantilever", schemes=("1p-stab",), **TINY)
    strip = lambda table: [
        dataclasses.replace(row, wall_time=0.0) for row in table.rows]
    assert strip(run_study(spec)) == strip(run_study(spec))


def test_emit_csv_round_trips_values(tmp_path, tiny_cantilever):
    path = tmp_path / "cantilever.csv"
    emit_csv(tiny_cantilever, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "scheme,level,u_tip_z,U_r,newton_iters_total,status"
    assert len(lines) == 1 + len(tiny_cantilever.rows)
    for line, row in zip(lines[1:], tiny_cantilever.rows):
        cells = line.split(",")
        assert cells[0] == row.scheme
        assert cells[1] == "0"
        assert float(cells[2]) == row.u_tip_z
        assert float(cells[3]) == row.u_r
        assert int(cells[4]) == row.newton_iters
        assert cells[5] == "ok"


def test_emit_csv_headers_match_every_study(tmp_path):
    for study in STUDIES:
        table = StudyTable(
            study=study, rows=(StudyRow(scheme="full", sweep=0),))
        path = tmp_path / f"{study}.csv"
        emit_csv(table, path)
        header = path.read_text().splitlines()[0]
        assert header == ",".join(CSV_COLUMNS[study])


def test_emit_csv_rejects_empty_table(tmp_path):
    path = tmp_path / "empty.csv"
    with pytest.raises(ValueError):
        emit_csv(StudyTable(study="cantilever", rows=()), path)
    assert not path.exists()
