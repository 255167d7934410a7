"""Command-line front end for the benchmark studies.

``hexstab <study> [options]`` runs one study, writes its CSV table and
prints a one-line JSON run summary.  Options override values from an
optional JSON config file mirroring the ``StudySpec`` fields.

Exit codes: 0 when every row converged, 2 when some rows failed, 1 on
usage or IO errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .bench import STUDIES, StudySpec, emit_csv, run_study

_SPEC_FIELDS = {f.name for f in dataclasses.fields(StudySpec)}
_TUPLE_FIELDS = (
    "schemes", "counts", "lengths", "body_force",
    "nu_grid", "d_grid", "load_grid",
)


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_grid(text):
    """Parse ``a:b:n`` into n evenly spaced floats from a to b."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid {text!r} is not of the form a:b:n")
    start, stop = float(parts[0]), float(parts[1])
    count = int(parts[2])
    if count < 1:
        raise ValueError(f"grid {text!r} needs at least one point")
    if count == 1:
        return (start,)
    step = (stop - start) / (count - 1)
    return tuple(start + i * step for i in range(count))


def build_parser():
    parser = _Parser(
        prog="hexstab",
        description="Cantilever benchmark studies for the hexahedral "
                    "integration schemes.",
    )
    parser.add_argument("study", choices=STUDIES)
    parser.add_argument(
        "--scheme",
        help="comma-separated scheme tokens (default: study-specific set)")
    parser.add_argument("--nx", type=int, help="elements along the beam")
    parser.add_argument("--ny", type=int, help="elements across the width")
    parser.add_argument("--nz", type=int, help="elements across the height")
    parser.add_argument(
        "--refine-levels", type=int,
        help="refinement level: sweep ceiling for the refine study, "
             "mesh level for the single-mesh studies")
    nu_group = parser.add_mutually_exclusive_group()
    nu_group.add_argument("--nu", type=float, help="Poisson ratio")
    nu_group.add_argument(
        "--nu-grid", metavar="a:b:n", help="Poisson ratio sweep grid")
    d_group = parser.add_mutually_exclusive_group()
    d_group.add_argument(
        "--d", type=float,
        help="single distortion parameter (swept against d = 0)")
    d_group.add_argument(
        "--d-grid", metavar="a:b:n", help="distortion sweep grid")
    parser.add_argument(
        "--load-steps", type=int, help="Newton load increments per solve")
    parser.add_argument(
        "--load-grid", metavar="a:b:n", help="load factor sweep grid")
    parser.add_argument(
        "--E", type=float, dest="e_modulus", help="Young's modulus in Pa")
    parser.add_argument("--out", help="CSV output path (default <study>.csv)")
    parser.add_argument(
        "--config", help="JSON file with StudySpec fields; flags override")
    return parser


def _load_config(path):
    try:
        with open(path) as stream:
            data = json.load(stream)
    except OSError as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError(f"config {path} must hold a JSON object")
    unknown = sorted(set(data) - _SPEC_FIELDS)
    if unknown:
        raise ValueError(f"config {path} has unknown keys: {unknown}")
    for key in _TUPLE_FIELDS:
        if isinstance(data.get(key), list):
            data[key] = tuple(data[key])
    return data


def _build_spec(args):
    fields = _load_config(args.config) if args.config else {}
    fields["study"] = args.study
    if args.scheme:
        fields["schemes"] = tuple(
            token for token in args.scheme.split(",") if token)
    counts = list(fields.get("counts", (10, 2, 2)))
    for axis, value in enumerate((args.nx, args.ny, args.nz)):
        if value is not None:
            counts[axis] = value
    fields["counts"] = tuple(counts)
    if args.refine_levels is not None:
        fields["level"] = args.refine_levels
        fields["refine_levels"] = args.refine_levels
    if args.nu is not None:
        fields["nu"] = args.nu
    if args.nu_grid:
        fields["nu_grid"] = _parse_grid(args.nu_grid)
    if args.d is not None:
        fields["d_grid"] = (0.0, args.d)
    if args.d_grid:
        fields["d_grid"] = _parse_grid(args.d_grid)
    if args.load_steps is not None:
        fields["load_steps"] = args.load_steps
    if args.load_grid:
        fields["load_grid"] = _parse_grid(args.load_grid)
    if args.e_modulus is not None:
        fields["e_modulus"] = args.e_modulus
    fields["out"] = args.out or fields.get("out") or f"{args.study}.csv"
    return StudySpec(**fields)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = _build_spec(args)
    except (ValueError, TypeError) as exc:
        print(f"hexstab: error: {exc}", file=sys.stderr)
        return 1

    try:
        table = run_study(spec)
        emit_csv(table, spec.out)
    except (ValueError, OSError) as exc:
        print(f"hexstab: error: {exc}", file=sys.stderr)
        return 1

    failed = table.failed_rows
    summary = {
        "study": table.study,
        "rows": len(table.rows),
        "failed": len(failed),
        "csv": spec.out,
        "wall_time": round(sum(row.wall_time for row in table.rows), 3),
    }
    print(json.dumps(summary))
    return 2 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
