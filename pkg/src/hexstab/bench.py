"""Cantilever benchmark studies comparing the integration schemes.

Each study sweeps one parameter of a clamped beam under a constant
body force and records tip displacements per scheme:

``cantilever``
    Single large-deformation solve per scheme at a fixed refinement
    level.
``refine``
    Sweep over uniform refinement levels.
``load-sweep``
    Sweep over load factors scaling the reference body force.
``nu-sweep``
    Sweep over Poisson ratios approaching the incompressible limit.
``distortion``
    Sweep over the zigzag mesh-distortion parameter, reporting the
    relative loss of the tip-displacement resultant.
``linear-distortion``
    The distortion sweep for the small-strain problem under a reduced
    load.

The default material maps ``(E, nu)`` to a Mooney-Rivlin solid with
``K1 = mu / 2``, ``K2 = 0`` and the classical bulk modulus, so the
small-strain limit recovers linear elasticity with exactly ``(E, nu)``.
The bulk modulus is capped at ``100 mu``: beyond that the secant-type
stabilization tangent loses definiteness on bent states and the
stabilized iterations stop converging, while the locking behaviour of
the capped material is already fully developed.

Results are plain CSV, one row per (scheme, sweep point); failed
solves keep their row with NaN values and the exception name in the
``status`` column.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass

import numpy as np

from .element import IntegrationScheme
from .errors import (
    ElementInverted,
    InvertedElement,
    NewtonDivergence,
    SolveFailure,
)
from .material import MaterialParams
from .mesh import distorted_beam_mesh, refined_box_mesh
from .solver import (
    NewtonConfig,
    extract_tip_displacement,
    solve_linear,
    solve_newton,
)

STUDIES = (
    "cantilever",
    "refine",
    "load-sweep",
    "nu-sweep",
    "distortion",
    "linear-distortion",
)

#: Bulk-to-shear ratio above which the bench material stops stiffening.
BULK_CAP_RATIO = 100.0

NU_GRID = (0.33, 0.4, 0.45, 0.48, 0.49, 0.495, 0.499)
LOAD_GRID = tuple(i / 10.0 for i in range(1, 11))
D_GRID = (0.0, 0.04, 0.08, 0.12, 0.16, 0.2)

_QUARTET = ("full", "1p-vol", "1p-stab", "1p-stab-iso")
DEFAULT_SCHEMES = {
    "cantilever": _QUARTET,
    "refine": _QUARTET,
    "load-sweep": _QUARTET,
    "nu-sweep": _QUARTET,
    "distortion": _QUARTET + ("1p-stab-constj", "1p-stab-iso-constj"),
    "linear-distortion": ("full", "1p-stab", "1p-stab-constj"),
}

#: Reference body force per study; the linear study uses a tenth of the
#: large-deformation load.
_DEFAULT_BODY = {study: (0.0, 0.0, -10e9) for study in STUDIES}
_DEFAULT_BODY["linear-distortion"] = (0.0, 0.0, -1e9)

CSV_COLUMNS = {
    "cantilever": (
        "scheme", "level", "u_tip_z", "U_r", "newton_iters_total", "status",
    ),
    "refine": (
        "scheme", "level", "u_tip_z", "U_r", "newton_iters_total",
        "n_elements", "status",
    ),
    "load-sweep": ("scheme", "load_factor", "u_tip_z", "status"),
    "nu-sweep": ("scheme", "nu", "u_tip_z", "status"),
    "distortion": ("scheme", "d", "U_r", "U_r_rel", "status"),
    "linear-distortion": ("scheme", "d", "U_r", "U_r_rel", "status"),
}

_SOLVE_ERRORS = (NewtonDivergence, SolveFailure, ElementInverted,
                 InvertedElement)


def bench_material(e_modulus, nu):
    """Benchmark material for given Young's modulus and Poisson ratio.

    Returns
    -------
    MaterialParams
        ``K1 = mu / 2``, ``K2 = 0`` and the classical bulk modulus
        capped at ``BULK_CAP_RATIO * mu``.
    """
    mu = e_modulus / (2.0 * (1.0 + nu))
    bulk = min(e_modulus / (3.0 * (1.0 - 2.0 * nu)), BULK_CAP_RATIO * mu)
    return MaterialParams.from_elastic(
        e_modulus, nu, K=bulk, K1=0.5 * mu, K2=0.0)


@dataclass(frozen=True)
class StudySpec:
    """Complete description of one benchmark study run.

    Parameters
    ----------
    study : str
        One of ``STUDIES``.
    schemes : tuple of str
        Scheme tokens to run; empty selects the study default.
    counts : tuple of int
        Base mesh subdivisions along the beam axis and the two
        transverse directions.
    lengths : tuple of float
        Beam dimensions in meters.
    e_modulus, nu : float
        Material inputs for :func:`bench_material`.
    body_force : tuple of float or None
        Reference body force density; ``None`` selects the study
        default.
    level : int
        Refinement level for the single-mesh studies.
    refine_levels : int
        Highest level of the refinement sweep.
    nu_grid, d_grid, load_grid : tuple of float
        Sweep grids.
    load_steps : int
        Newton load increments per solve.
    out : str or None
        CSV output path, if any.
    """

    study: str
    schemes: tuple = ()
    counts: tuple = (10, 2, 2)
    lengths: tuple = (0.5, 0.1, 0.1)
    e_modulus: float = 200e9
    nu: float = 0.33
    body_force: tuple = None
    level: int = 0
    refine_levels: int = 2
    nu_grid: tuple = NU_GRID
    d_grid: tuple = D_GRID
    load_grid: tuple = LOAD_GRID
    load_steps: int = 20
    out: str = None

    def __post_init__(self):
        if self.study not in STUDIES:
            raise ValueError(f"unknown study {self.study!r}")
        for token in self.schemes:
            IntegrationScheme.from_token(token)

    def resolved_schemes(self):
        """Scheme list to run, falling back to the study default."""
        tokens = self.schemes or DEFAULT_SCHEMES[self.study]
        schemes = tuple(IntegrationScheme.from_token(t) for t in tokens)
        if self.study == "linear-distortion":
            for scheme in schemes:
                if not scheme.linear_capable:
                    raise ValueError(
                        f"scheme {scheme.token!r} has no small-strain form")
        return schemes

    def resolved_body(self):
        """Body force as an array, falling back to the study default."""
        body = self.body_force
        if body is None:
            body = _DEFAULT_BODY[self.study]
        return np.asarray(body, dtype=float)

    def material(self, nu=None):
        """Benchmark material at this spec's modulus and given ratio."""
        return bench_material(self.e_modulus, self.nu if nu is None else nu)

    def newton_config(self):
        """Newton settings shared by every nonlinear study point."""
        return NewtonConfig(
            rel_tol=1e-6, max_iterations=100, load_steps=self.load_steps)


@dataclass(frozen=True)
class StudyRow:
    """One (scheme, sweep point) result.

    ``sweep`` holds the study's sweep coordinate: refinement level,
    load factor, Poisson ratio or distortion parameter.  Failed solves
    carry the exception name in ``status`` and NaN results.
    """

    scheme: str
    sweep: float
    u_tip_z: float = math.nan
    u_r: float = math.nan
    u_r_rel: float = math.nan
    newton_iters: int = 0
    n_elements: int = 0
    status: str = "ok"
    wall_time: float = 0.0

    @property
    def ok(self):
        return self.status == "ok"


@dataclass(frozen=True)
class StudyTable:
    """All rows of one study run, in sweep order."""

    study: str
    rows: tuple

    @property
    def failed_rows(self):
        return tuple(row for row in self.rows if not row.ok)


def _solve_point(mesh, params, scheme, body, config):
    """One nonlinear solve reduced to a partial StudyRow field dict."""
    start = time.perf_counter()
    try:
        u, report = solve_newton(mesh, params, scheme, body, config=config)
    except _SOLVE_ERRORS as exc:
        report = getattr(exc, "report", None)
        iters = report.total_iterations if report is not None else 0
        return dict(
            newton_iters=iters,
            status=type(exc).__name__,
            wall_time=time.perf_counter() - start,
        )
    tip, resultant = extract_tip_displacement(mesh, u)
    return dict(
        u_tip_z=float(tip[2]),
        u_r=resultant,
        newton_iters=report.total_iterations,
        wall_time=time.perf_counter() - start,
    )


def _solve_point_linear(mesh, params, scheme, body):
    """One small-strain solve reduced to a partial StudyRow field dict."""
    start = time.perf_counter()
    try:
        u = solve_linear(mesh, params, scheme, body)
    except _SOLVE_ERRORS as exc:
        return dict(
            status=type(exc).__name__,
            wall_time=time.perf_counter() - start,
        )
    tip, resultant = extract_tip_displacement(mesh, u)
    return dict(
        u_tip_z=float(tip[2]),
        u_r=resultant,
        wall_time=time.perf_counter() - start,
    )


def _fixed_mesh_rows(spec, meshes):
    """Rows for the cantilever and refine studies."""
    params = spec.material()
    body = spec.resolved_body()
    config = spec.newton_config()
    rows = []
    for scheme in spec.resolved_schemes():
        for level, mesh in meshes:
            fields = _solve_point(mesh, params, scheme, body, config)
            rows.append(StudyRow(
                scheme=scheme.token, sweep=level,
                n_elements=mesh.n_elements, **fields))
    return rows


def _run_cantilever(spec):
    mesh = refined_box_mesh(spec.counts, spec.lengths, spec.level)
    return _fixed_mesh_rows(spec, [(spec.level, mesh)])


def _run_refine(spec):
    meshes = [
        (level, refined_box_mesh(spec.counts, spec.lengths, level))
        for level in range(spec.refine_levels + 1)
    ]
    return _fixed_mesh_rows(spec, meshes)


def _run_load_sweep(spec):
    mesh = refined_box_mesh(spec.counts, spec.lengths, spec.level)
    params = spec.material()
    body = spec.resolved_body()
    config = spec.newton_config()
    rows = []
    for scheme in spec.resolved_schemes():
        for factor in spec.load_grid:
            fields = _solve_point(
                mesh, params, scheme, factor * body, config)
            rows.append(StudyRow(scheme=scheme.token, sweep=factor, **fields))
    return rows


def _run_nu_sweep(spec):
    mesh = refined_box_mesh(spec.counts, spec.lengths, spec.level)
    body = spec.resolved_body()
    config = spec.newton_config()
    rows = []
    for scheme in spec.resolved_schemes():
        for nu in spec.nu_grid:
            fields = _solve_point(
                mesh, spec.material(nu), scheme, body, config)
            rows.append(StudyRow(scheme=scheme.token, sweep=nu, **fields))
    return rows


def _distortion_rows(spec, solve):
    """Distortion sweep with the relative loss against the d = 0 run."""
    params = spec.material()
    body = spec.resolved_body()
    meshes = [
        (d, distorted_beam_mesh(spec.counts, spec.lengths, d))
        for d in spec.d_grid
    ]
    rows = []
    for scheme in spec.resolved_schemes():
        scheme_rows = []
        for d, mesh in meshes:
            fields = solve(mesh, params, scheme, body)
            scheme_rows.append(StudyRow(
                scheme=scheme.token, sweep=d, **fields))
        baseline = next(
            (row.u_r for row in scheme_rows
             if row.sweep == 0.0 and row.ok), math.nan)
        for row in scheme_rows:
            rel = 1.0 - row.u_r / baseline if row.ok else math.nan
            rows.append(StudyRow(
                scheme=row.scheme, sweep=row.sweep, u_tip_z=row.u_tip_z,
                u_r=row.u_r, u_r_rel=rel, newton_iters=row.newton_iters,
                n_elements=row.n_elements, status=row.status,
                wall_time=row.wall_time))
    return rows


def _run_distortion(spec):
    config = spec.newton_config()

    def solve(mesh, params, scheme, body):
        return _solve_point(mesh, params, scheme, body, config)

    return _distortion_rows(spec, solve)


def _run_linear_distortion(spec):
    return _distortion_rows(spec, _solve_point_linear)


_RUNNERS = {
    "cantilever": _run_cantilever,
    "refine": _run_refine,
    "load-sweep": _run_load_sweep,
    "nu-sweep": _run_nu_sweep,
    "distortion": _run_distortion,
    "linear-distortion": _run_linear_distortion,
}


def run_study(spec):
    """Execute one study sweep.

    Failed solves do not abort the sweep; their rows carry the
    exception name in ``status``.  Runs are deterministic for a given
    spec up to the recorded wall times.

    Returns
    -------
    StudyTable
    """
    rows = _RUNNERS[spec.study](spec)
    return StudyTable(study=spec.study, rows=tuple(rows))


_COLUMN_FIELDS = {
    "scheme": "scheme",
    "level": "sweep",
    "load_factor": "sweep",
    "nu": "sweep",
    "d": "sweep",
    "u_tip_z": "u_tip_z",
    "U_r": "u_r",
    "U_r_rel": "u_r_rel",
    "newton_iters_total": "newton_iters",
    "n_elements": "n_elements",
    "status": "status",
}


def _cell(row, column):
    value = getattr(row, _COLUMN_FIELDS[column])
    if column == "level":
        return int(value)
    return value


def emit_csv(table, path):
    """Write a study table as CSV with full-precision floats.

    Float cells use ``repr`` formatting, so re-parsing the file
    recovers the in-memory values exactly.

    Raises
    ------
    ValueError
        If the table has no rows; no file is written.
    OSError
        On IO failure, with the path in the message.
    """
    if not table.rows:
        raise ValueError(f"study {table.study!r} produced no rows")
    columns = CSV_COLUMNS[table.study]
    try:
        with open(path, "w", newline="") as stream:
            writer = csv.writer(stream, lineterminator="\n")
            writer.writerow(columns)
            for row in table.rows:
                writer.writerow([_cell(row, column) for column in columns])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
