"""Experiment pipelines: sequential (surface / GA) and simultaneous methods.

A sequential fitness call performs a full equilibrium solve (warm started
from the desired state for control problems and from the previous
solution for design problems, with an automatic fall back to load
stepping) and evaluates the cost on the converged state.  The
simultaneous methods instead treat the free dofs, the variables and
(in the full mode) the multipliers as independent unknowns of the
stacked optimality residual and minimize its squared norm.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..costs import shape_matching_cost, volume_and_mass
from ..design import section_arrays
from ..errors import BeamOptError, NonConvergenceError, SingularTangentError, SpecError
from ..evolutionary import EvolveResult, GaSettings, evolve
from ..kkt import bound_box_from_reference, eliminate_multipliers, kkt_residual_control
from ..mesh import Configuration
from ..solver import NewtonOptions, newton_solve
from ..surrogate import SampleSet, SurfaceResult, surface_minimize
from .configio import ExperimentSpec, default_spec
from .presets import ControlProblem, DesignProblem, iletter_problem, thickness_problem, tletter_problem

__all__ = [
    "FAILED_SOLVE_COST",
    "build_problem",
    "control_objective",
    "design_objective",
    "solve_control",
    "solve_design",
    "build_sample_grid",
    "RunRow",
    "RunReport",
    "run_experiment",
    "stats_report",
    "export_results",
    "shape_polyline",
]

FAILED_SOLVE_COST = 1e30


def build_problem(spec: ExperimentSpec):
    """Instantiate the preset problem with the spec's overrides applied."""
    bounds = spec.box()
    load_steps = spec.load_steps
    if spec.preset == "tletter":
        return tletter_problem(
            bounds=bounds, alpha=spec.alpha, load_steps=load_steps or 10
        )
    if spec.preset in ("iletter", "iletter-reg"):
        return iletter_problem(
            regularized=spec.preset == "iletter-reg",
            couple=spec.couple,
            bounds=bounds,
            alpha=spec.alpha,
            load_steps=load_steps or 10,
        )
    if spec.preset in ("thickness-shear", "thickness-disp"):
        kind = "shear-energy-max" if spec.preset == "thickness-shear" else "displacement-norm"
        problem = thickness_problem(
            cost_kind=kind,
            penalty_weight=spec.penalty_weight,
            mass_limit=spec.mass_limit if spec.mass_limit is not None else 30000.0,
            load_steps=load_steps or 5,
        )
        problem.design = replace(problem.design, bounds=bounds)
        return problem
    raise SpecError(f"unknown preset {spec.preset!r}")


# ---------------------------------------------------------------------------
# sequential objectives (one equilibrium solve per call)
# ---------------------------------------------------------------------------


def solve_control(problem: ControlProblem, x: np.ndarray, warm: Configuration | None = None):
    """Equilibrium at control point ``x`` (warm start, ramp fallback)."""
    nu = problem.control.expand(np.asarray(x, dtype=float))
    warm = warm if warm is not None else problem.warm
    options = replace(problem.newton, try_direct=True, max_iterations=14)
    return newton_solve(problem.mesh, problem.loadcase, nu=nu, options=options, initial=warm)


def solve_design(problem: DesignProblem, values: np.ndarray, warm: Configuration | None = None):
    """Equilibrium for design ``values``; returns (result, section arrays)."""
    arrays = section_arrays(problem.mesh, problem.design, np.asarray(values, dtype=float))
    if warm is None:
        result = newton_solve(problem.mesh, problem.loadcase, props=arrays.props, options=problem.newton)
    else:
        options = replace(problem.newton, try_direct=True, max_iterations=14)
        result = newton_solve(
            problem.mesh, problem.loadcase, props=arrays.props, options=options, initial=warm
        )
    return result, arrays


def control_objective(problem: ControlProblem):
    """Fitness callable for the control problem plus a diagnostics dict."""
    diagnostics = {"failed_solves": 0, "solves": 0}

    def objective(x: np.ndarray) -> float:
        diagnostics["solves"] += 1
        try:
            result = solve_control(problem, x)
        except (NonConvergenceError, SingularTangentError):
            diagnostics["failed_solves"] += 1
            return FAILED_SOLVE_COST
        J = shape_matching_cost(problem.mesh, result.config, problem.desired)
        return J + problem.control.regularization(x)

    return objective, diagnostics


def design_objective(problem: DesignProblem):
    """Fitness callable for the design problem (warm started from the last solve)."""
    diagnostics = {"failed_solves": 0, "solves": 0}
    state: dict = {"warm": None}

    def objective(values: np.ndarray) -> float:
        diagnostics["solves"] += 1
        try:
            result, arrays = solve_design(problem, values, warm=state["warm"])
        except (NonConvergenceError, SingularTangentError):
            diagnostics["failed_solves"] += 1
            return FAILED_SOLVE_COST
        state["warm"] = result.config
        return problem.cost.value(
            problem.mesh, result.config, problem.design, np.asarray(values, float), arrays
        )

    return objective, diagnostics


def _objective_for(problem):
    if isinstance(problem, ControlProblem):
        return control_objective(problem)
    return design_objective(problem)


# ---------------------------------------------------------------------------
# response-surface pipeline
# ---------------------------------------------------------------------------


def build_sample_grid(problem, shape: tuple[int, ...], box: np.ndarray) -> tuple[SampleSet, int]:
    """Cost samples on a structured grid; every value is a converged solve."""
    objective, diagnostics = _objective_for(problem)
    samples = SampleSet.from_grid(objective, box, shape)
    if np.any(samples.values >= FAILED_SOLVE_COST):
        raise NonConvergenceError("a grid point failed to reach equilibrium", float("nan"))
    return samples, diagnostics["solves"]


def run_surface(problem, spec: ExperimentSpec) -> tuple[SurfaceResult, SampleSet, int]:
    box = spec.box()
    samples, n_solves = build_sample_grid(problem, spec.grid, box)
    x0 = samples.points[int(np.argmin(samples.values))]
    result = surface_minimize(samples, x0, box, use_hessian=spec.use_hessian)
    return result, samples, n_solves


# ---------------------------------------------------------------------------
# simultaneous (stacked-residual) objectives
# ---------------------------------------------------------------------------


def _config_from_free(problem: ControlProblem, z_phi: np.ndarray) -> Configuration:
    vec = Configuration(problem.mesh.nodes.copy(), problem.mesh.node_angles.copy()).dof_vector()
    for dof, value in problem.mesh.fixed_dofs.items():
        vec[dof] = value
    vec[problem.mesh.free_dofs] = z_phi
    return Configuration.from_dof_vector(vec)


def simultaneous_boxes(problem: ControlProblem, ep: float, mode: str) -> np.ndarray:
    """Stacked variable box: EP band around the desired state, control box,
    and (full mode) an EP band around the adjoint multipliers at the guess."""
    free = problem.mesh.free_dofs
    phi_box = bound_box_from_reference(problem.desired.dof_vector()[free], ep)
    boxes = [phi_box, problem.control.bounds]
    if mode == "full":
        _, _, lam = eliminate_multipliers(
            problem.mesh, problem.loadcase, problem.desired, problem.desired_x,
            problem.desired, problem.control,
        )
        boxes.append(bound_box_from_reference(lam, ep))
    return np.vstack(boxes)


def simultaneous_objective(problem: ControlProblem, mode: str):
    """Least-squares merit of the stacked residual over the z vector."""
    if mode not in ("full", "reduced"):
        raise ValueError(f"unknown simultaneous mode {mode!r}")
    free = problem.mesh.free_dofs
    n_free = len(free)
    n_x = problem.control.n_variables

    def merit(z: np.ndarray) -> float:
        config = _config_from_free(problem, z[:n_free])
        x = z[n_free : n_free + n_x]
        try:
            if mode == "reduced":
                r_lam, r_x, _ = eliminate_multipliers(
                    problem.mesh, problem.loadcase, config, x, problem.desired, problem.control
                )
                return float(r_lam @ r_lam + r_x @ r_x)
            lam = z[n_free + n_x :]
            kkt = kkt_residual_control(
                problem.mesh, problem.loadcase, config, x, lam, problem.desired, problem.control
            )
            return kkt.merit
        except (SingularTangentError, np.linalg.LinAlgError):
            return FAILED_SOLVE_COST

    return merit, n_free, n_x


# ---------------------------------------------------------------------------
# run orchestration
# ---------------------------------------------------------------------------


@dataclass
class RunRow:
    seed: int
    values: tuple[float, ...]
    cost: float
    n_calls: int
    wall_time: float
    stop_reason: str
    failed_solves: int = 0


@dataclass
class RunReport:
    spec: ExperimentSpec
    variable_names: tuple[str, ...]
    rows: list[RunRow]
    aggregates: dict[str, tuple[float, float, float, float]] = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def recompute(self) -> None:
        self.aggregates = stats_report(self.rows, self.variable_names)


def stats_report(rows: list[RunRow], names: tuple[str, ...]) -> dict[str, tuple[float, float, float, float]]:
    """Per-variable and per-call-count (min, max, mean, population std)."""
    if not rows:
        raise ValueError("at least one run row is required")
    out: dict[str, tuple[float, float, float, float]] = {}
    values = np.array([row.values for row in rows], dtype=float)
    for j, name in enumerate(names):
        col = values[:, j]
        out[name] = (float(col.min()), float(col.max()), float(col.mean()), float(col.std()))
    calls = np.array([row.n_calls for row in rows], dtype=float)
    out["fitness_calls"] = (float(calls.min()), float(calls.max()), float(calls.mean()), float(calls.std()))
    cost = np.array([row.cost for row in rows], dtype=float)
    out["cost"] = (float(cost.min()), float(cost.max()), float(cost.mean()), float(cost.std()))
    return out


def _ga_row(seed: int, result: EvolveResult, wall: float, failed: int) -> RunRow:
    return RunRow(
        seed=seed,
        values=tuple(float(v) for v in result.best_x),
        cost=float(result.best_value),
        n_calls=result.n_calls,
        wall_time=wall,
        stop_reason=result.stop_reason,
        failed_solves=failed,
    )


def run_experiment(spec: ExperimentSpec) -> RunReport:
    """Execute the spec end to end and return the per-run report.

    ``ga-sequential`` repeats the seeded evolutionary search ``spec.runs``
    times (seeds ``spec.seed + k``); ``surface-sequential`` builds the cost
    grid once and descends the diffuse approximation; the simultaneous
    methods minimize the stacked-residual merit over state + control (+
    multipliers).
    """
    problem = build_problem(spec)
    names = spec.variable_names()
    rows: list[RunRow] = []
    extra: dict = {}

    if spec.method == "forward":
        raise SpecError("method 'forward' is driven through the CLI, not run_experiment")

    if spec.method == "surface-sequential":
        start = time.perf_counter()
        result, samples, n_solves = run_surface(problem, spec)
        rows.append(
            RunRow(
                seed=spec.seed,
                values=tuple(float(v) for v in result.x),
                cost=float(result.value),
                n_calls=n_solves,
                wall_time=time.perf_counter() - start,
                stop_reason="converged" if result.converged else "max-iterations",
            )
        )
        extra["surface_iterations"] = result.iterations
        extra["samples"] = samples
        extra["trail"] = result.trail
    elif spec.method == "ga-sequential":
        for k in range(spec.runs):
            objective, diagnostics = _objective_for(problem)
            settings = replace(spec.ga, seed=spec.seed + k)
            start = time.perf_counter()
            result = evolve(objective, spec.box(), settings, mode=spec.ga_mode)
            rows.append(
                _ga_row(spec.seed + k, result, time.perf_counter() - start, diagnostics["failed_solves"])
            )
            if spec.write_history and k == 0:
                extra["history"] = result.history
    elif spec.method in ("ga-simultaneous-full", "ga-simultaneous-reduced"):
        if not isinstance(problem, ControlProblem):
            raise SpecError("simultaneous methods are wired for the control presets")
        mode = "full" if spec.method.endswith("full") else "reduced"
        merit, n_free, n_x = simultaneous_objective(problem, mode)
        boxes = simultaneous_boxes(problem, spec.ep, mode)
        for k in range(spec.runs):
            settings = replace(spec.ga, seed=spec.seed + k)
            start = time.perf_counter()
            result = evolve(merit, boxes, settings, mode=spec.ga_mode)
            x_part = result.best_x[n_free : n_free + n_x]
            row = _ga_row(spec.seed + k, result, time.perf_counter() - start, 0)
            row.values = tuple(float(v) for v in x_part)
            rows.append(row)
            if spec.write_history and k == 0:
                extra["history"] = result.history
    else:
        raise SpecError(f"unknown method {spec.method!r}")

    report = RunReport(spec=spec, variable_names=names, rows=rows, extra=extra)
    report.recompute()
    if spec.output_dir is not None:
        export_results(report, spec.output_dir, problem=problem)
    return report


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------


def shape_polyline(mesh, config: Configuration) -> list[tuple[float, float, float]]:
    """(arc length, x, y) rows of the deformed axis at the mesh nodes."""
    lengths = np.concatenate([[0.0], np.cumsum(mesh.element_lengths)])
    node_s = np.zeros(mesh.n_nodes)
    for e in range(mesh.n_elements):
        nodes = mesh.elements[e]
        span = np.linspace(lengths[e], lengths[e + 1], len(nodes))
        node_s[nodes] = span
    return [
        (float(node_s[a]), float(config.positions[a, 0]), float(config.positions[a, 1]))
        for a in range(mesh.n_nodes)
    ]


def _write_csv(path: Path, header: list[str], rows) -> None:
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise BeamOptError(f"cannot write {path}: {exc}") from exc


def export_results(report: RunReport, outdir, problem=None) -> list[Path]:
    """Write per-run and aggregate CSV tables (plus optional shape/history)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    runs_path = outdir / f"{report.spec.preset}_{report.spec.method}_runs.csv"
    header = ["seed", *report.variable_names, "cost", "fitness_calls", "wall_time", "stop_reason", "failed_solves"]
    _write_csv(
        runs_path,
        header,
        [
            [row.seed, *[format(v, ".17g") for v in row.values], format(row.cost, ".17g"),
             row.n_calls, format(row.wall_time, ".6g"), row.stop_reason, row.failed_solves]
            for row in report.rows
        ],
    )
    written.append(runs_path)

    agg_path = outdir / f"{report.spec.preset}_{report.spec.method}_aggregate.csv"
    _write_csv(
        agg_path,
        ["quantity", "min", "max", "mean", "std"],
        [
            [name, *[format(v, ".17g") for v in stats]]
            for name, stats in report.aggregates.items()
        ],
    )
    written.append(agg_path)

    samples = report.extra.get("samples")
    if samples is not None:
        sample_path = outdir / f"{report.spec.preset}_grid.csv"
        samples.save_csv(sample_path)
        written.append(sample_path)

    history = report.extra.get("history")
    if history is not None:
        hist_path = outdir / f"{report.spec.preset}_{report.spec.method}_history.csv"
        _write_csv(
            hist_path,
            ["generation", "best", "mean", *[f"best_{n}" for n in report.variable_names]],
            [
                [rec.generation, format(rec.best_value, ".17g"), format(rec.mean_value, ".17g"),
                 *[format(v, ".17g") for v in rec.best_x[: len(report.variable_names)]]]
                for rec in history
            ],
        )
        written.append(hist_path)

    if report.spec.write_shapes and problem is not None and report.rows:
        best = min(report.rows, key=lambda r: r.cost)
        try:
            if isinstance(problem, ControlProblem):
                solved = solve_control(problem, np.array(best.values))
                config, mesh = solved.config, problem.mesh
            else:
                solved, _ = solve_design(problem, np.array(best.values))
                config, mesh = solved.config, problem.mesh
            shape_path = outdir / f"{report.spec.preset}_shape.csv"
            _write_csv(shape_path, ["s", "x", "y"], shape_polyline(mesh, config))
            written.append(shape_path)
        except (NonConvergenceError, SingularTangentError):
            pass
    return written
