"""Newton solution of the equilibrium equations with load stepping.

The external load is ramped uniformly; each step is solved by a full
Newton iteration on the free dofs with the consistent tangent.  A step
that fails to converge is halved (up to a budget) before the solve is
declared non-convergent.  Positions and rotations are both updated
additively, the planar image of the multiplicative rotation update.

For repeated solves at nearby loads (surrogate grids, fitness calls) an
initial configuration can be supplied together with ``try_direct``; a
single full-load Newton attempt is then made before falling back to the
ramp from the reference state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import assemble_system
from .errors import NonConvergenceError, SingularTangentError
from .loads import LoadCase
from .mesh import Configuration, Mesh, reference_configuration

__all__ = ["NewtonOptions", "StepRecord", "SolveResult", "newton_solve"]


@dataclass(frozen=True)
class NewtonOptions:
    load_steps: int = 10
    max_iterations: int = 25
    tol_rel: float = 1e-10
    tol_abs: float = 1e-12
    # accept once the Newton increment stagnates at machine level relative to
    # the state; the residual floor scales with stiffness and cannot always
    # reach tol_rel * r0 when the applied load is many orders smaller
    step_tol: float = 1e-13
    max_halvings: int = 4
    try_direct: bool = False
    divergence_factor: float = 1e8


@dataclass
class StepRecord:
    load_scale: float
    iterations: int
    residual_norms: list[float] = field(default_factory=list)


@dataclass
class SolveResult:
    config: Configuration
    steps: list[StepRecord]
    converged: bool = True

    @property
    def total_iterations(self) -> int:
        return sum(s.iterations for s in self.steps)

    @property
    def max_step_iterations(self) -> int:
        return max((s.iterations for s in self.steps), default=0)


def _solve_step(
    mesh: Mesh,
    config: Configuration,
    loadcase: LoadCase,
    nu,
    props,
    scale: float,
    options: NewtonOptions,
) -> StepRecord | None:
    """Newton-iterate ``config`` in place at a fixed load scale.

    Returns the step record on convergence, ``None`` on divergence.
    """
    free = mesh.free_dofs
    record = StepRecord(load_scale=scale, iterations=0)
    r_full, K = assemble_system(mesh, config, loadcase, nu, props, scale)
    r = r_full[free]
    norm0 = float(np.linalg.norm(r))
    record.residual_norms.append(norm0)
    tol = max(options.tol_rel * norm0, options.tol_abs)
    norm = norm0
    while norm > tol:
        if record.iterations >= options.max_iterations:
            return None
        if not np.isfinite(norm) or norm > options.divergence_factor * (norm0 + 1.0):
            return None
        Kff = K[np.ix_(free, free)]
        try:
            delta = np.linalg.solve(Kff, -r)
        except np.linalg.LinAlgError as exc:
            raise SingularTangentError(f"tangent singular at load scale {scale:.4f}") from exc
        vec = config.dof_vector()
        vec[free] += delta
        config.positions[:, 0] = vec[0::3]
        config.positions[:, 1] = vec[1::3]
        config.angles[:] = vec[2::3]
        record.iterations += 1
        r_full, K = assemble_system(mesh, config, loadcase, nu, props, scale)
        r = r_full[free]
        norm = float(np.linalg.norm(r))
        record.residual_norms.append(norm)
        stagnated = float(np.linalg.norm(delta)) <= options.step_tol * max(
            1.0, float(np.linalg.norm(vec[free]))
        )
        if stagnated and norm < norm0:
            break
    return record


def _apply_prescribed(mesh: Mesh, config: Configuration) -> None:
    if not mesh.fixed_dofs:
        return
    vec = config.dof_vector()
    for dof, value in mesh.fixed_dofs.items():
        vec[dof] = value
    config.positions[:, 0] = vec[0::3]
    config.positions[:, 1] = vec[1::3]
    config.angles[:] = vec[2::3]


def _ramp(mesh, loadcase, nu, props, options, start: Configuration) -> SolveResult:
    config = start
    steps: list[StepRecord] = []
    scale = 0.0
    increment = 1.0 / options.load_steps
    halvings = 0
    while scale < 1.0 - 1e-14:
        target = min(1.0, scale + increment)
        trial = config.copy()
        record = _solve_step(mesh, trial, loadcase, nu, props, target, options)
        if record is None:
            halvings += 1
            if halvings > options.max_halvings:
                last = float("nan")
                raise NonConvergenceError(
                    f"load step to scale {target:.4f} failed after {options.max_halvings} halvings",
                    last,
                )
            increment *= 0.5
            continue
        config = trial
        scale = target
        steps.append(record)
    return SolveResult(config=config, steps=steps)


def newton_solve(
    mesh: Mesh,
    loadcase: LoadCase,
    nu: np.ndarray | None = None,
    props=None,
    options: NewtonOptions | None = None,
    initial: Configuration | None = None,
) -> SolveResult:
    """Solve for equilibrium under ``loadcase`` (optionally scaled by ``nu``).

    Raises
    ------
    NonConvergenceError
        If the ramp cannot be completed within the halving budget.
    SingularTangentError
        If the free-dof tangent cannot be factorized.
    """
    options = options or NewtonOptions()
    loadcase.validate(mesh)
    if initial is not None and options.try_direct:
        trial = initial.copy()
        _apply_prescribed(mesh, trial)
        record = _solve_step(mesh, trial, loadcase, nu, props, 1.0, options)
        if record is not None:
            return SolveResult(config=trial, steps=[record])
    start = reference_configuration(mesh)
    _apply_prescribed(mesh, start)
    return _ramp(mesh, loadcase, nu, props, options, start)
