"""Command-line front end.

Verbs: ``forward`` (single equilibrium solve + shape export), ``surface``
(grid + diffuse-approximation descent), ``optimize`` (run the configured
method), ``preset`` (print a canonical configuration) and ``stats``
(re-aggregate a per-run CSV).  Exit codes: 0 success, 1 configuration
error, 2 runtime non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..errors import BeamOptError, NonConvergenceError, SingularTangentError, SpecError
from .configio import ExperimentSpec, canonical_text, default_spec, parse_config
from .experiments import (
    RunRow,
    build_problem,
    export_results,
    run_experiment,
    shape_polyline,
    solve_control,
    solve_design,
    stats_report,
)
from .presets import PRESET_NAMES, ControlProblem


def _load_spec(args) -> ExperimentSpec:
    if getattr(args, "config", None):
        text = Path(args.config).read_text()
        spec = parse_config(text)
    elif getattr(args, "preset", None):
        spec = default_spec(args.preset)
    else:
        raise SpecError("either --config FILE or --preset NAME is required")
    updates = {}
    if getattr(args, "method", None):
        updates["method"] = args.method
    if getattr(args, "runs", None) is not None:
        updates["runs"] = args.runs
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "out", None):
        updates["output_dir"] = args.out
    if getattr(args, "load_steps", None) is not None:
        updates["load_steps"] = args.load_steps
    return replace(spec, **updates) if updates else spec


def _cmd_forward(args) -> int:
    spec = _load_spec(args)
    problem = build_problem(spec)
    at = np.array([float(p) for p in args.at.split(",")]) if args.at else None
    if isinstance(problem, ControlProblem):
        x = at if at is not None else problem.desired_x
        result = solve_control(problem, x, warm=None if args.cold else problem.warm)
    else:
        x = at if at is not None else problem.reference_values
        result, _ = solve_design(problem, x)
    total_iters = result.total_iterations
    print(f"converged in {len(result.steps)} load steps, {total_iters} Newton iterations")
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        path = outdir / f"{spec.preset}_forward_shape.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["s", "x", "y"])
            writer.writerows(shape_polyline(problem.mesh, result.config))
        print(f"wrote {path}")
    return 0


def _cmd_surface(args) -> int:
    spec = replace(_load_spec(args), method="surface-sequential")
    report = run_experiment(spec)
    row = report.rows[0]
    names = ", ".join(f"{n}={v:.6g}" for n, v in zip(report.variable_names, row.values))
    print(f"surface minimum: {names} (approx cost {row.cost:.6g}, {row.n_calls} grid solves)")
    return 0


def _cmd_optimize(args) -> int:
    spec = _load_spec(args)
    if spec.method == "forward":
        raise SpecError("use the 'forward' verb for single solves")
    report = run_experiment(spec)
    print(f"{spec.preset} / {spec.method}: {len(report.rows)} run(s)")
    for name, (vmin, vmax, vmean, vstd) in report.aggregates.items():
        print(f"  {name:>14}: min {vmin:.6g}  max {vmax:.6g}  mean {vmean:.6g}  std {vstd:.3g}")
    return 0


def _cmd_preset(args) -> int:
    spec = default_spec(args.name)
    sys.stdout.write(canonical_text(spec))
    return 0


def _cmd_stats(args) -> int:
    path = Path(args.runs_csv)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader if row]
    try:
        n_vars = header.index("cost") - 1
    except ValueError as exc:
        raise SpecError(f"{path} is not a per-run table (no 'cost' column)") from exc
    names = tuple(header[1 : 1 + n_vars])
    run_rows = [
        RunRow(
            seed=int(row[0]),
            values=tuple(float(v) for v in row[1 : 1 + n_vars]),
            cost=float(row[1 + n_vars]),
            n_calls=int(row[2 + n_vars]),
            wall_time=float(row[3 + n_vars]),
            stop_reason=row[4 + n_vars],
        )
        for row in rows
    ]
    for name, (vmin, vmax, vmean, vstd) in stats_report(run_rows, names).items():
        print(f"{name:>14}: min {vmin:.6g}  max {vmax:.6g}  mean {vmean:.6g}  std {vstd:.3g}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beamopt", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    def add_common(p, with_method=True):
        p.add_argument("--config", help="configuration file")
        p.add_argument("--preset", choices=PRESET_NAMES, help="built-in experiment")
        if with_method:
            p.add_argument(
                "--method",
                choices=("surface-sequential", "ga-sequential", "ga-simultaneous-full", "ga-simultaneous-reduced"),
            )
        p.add_argument("--runs", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory for CSV exports")
        p.add_argument("--load-steps", type=int, dest="load_steps")

    p_forward = sub.add_parser("forward", help="single equilibrium solve")
    add_common(p_forward, with_method=False)
    p_forward.add_argument("--at", help="comma-separated variable values (default: preset target)")
    p_forward.add_argument("--cold", action="store_true", help="solve by load stepping from the reference")
    p_forward.set_defaults(func=_cmd_forward)

    p_surface = sub.add_parser("surface", help="response-surface minimization")
    add_common(p_surface, with_method=False)
    p_surface.set_defaults(func=_cmd_surface)

    p_opt = sub.add_parser("optimize", help="run the configured optimization method")
    add_common(p_opt)
    p_opt.set_defaults(func=_cmd_optimize)

    p_preset = sub.add_parser("preset", help="print a preset's canonical configuration")
    p_preset.add_argument("name", choices=PRESET_NAMES)
    p_preset.set_defaults(func=_cmd_preset)

    p_stats = sub.add_parser("stats", help="re-aggregate a per-run CSV table")
    p_stats.add_argument("runs_csv")
    p_stats.set_defaults(func=_cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (NonConvergenceError, SingularTangentError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    except BeamOptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
