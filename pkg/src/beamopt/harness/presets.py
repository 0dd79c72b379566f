"""Built-in experiment problems.

Three families are shipped:

* ``tletter``  -- optimal control of a curved cantilever (semicircular part
  of diameter 10 welded to a straight part of length 10, unit-square
  section, E=12000, G=6000) deployed by a vertical force and a moment
  acting at the end of the curved part; target control (F, M) = (40, 205).
* ``iletter``  -- same curved part with a short straight bar of length 2;
  controlled by a moment and a couple of follower forces acting across the
  length-2 bar (lever arm 2).  With the shape-only cost the problem is
  degenerate along 2F + M = const; a small quadratic control penalty that
  counts each physical force restores uniqueness at F = M = const / 3.
* ``thickness`` -- four-element cantilever (L=1000, b=30, E=75000,
  G=50000, rho=1/30, tip force 1000) with one thickness per element,
  either maximizing the shear energy or minimizing the displacement norm
  under a quadratic penalty on the total mass above 30000.

The desired shapes are generated by forward solves at the target controls,
so every recovery experiment is self-consistent with this solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..design import ControlParam, DesignCostModel, DesignParam
from ..loads import FollowerForce, LoadCase, LoadPattern, PointForce, PointMoment
from ..mesh import Configuration, Mesh, arc_mesh, join_meshes, straight_mesh
from ..section import RectangularGeometry, SectionLaw
from ..solver import NewtonOptions, newton_solve

__all__ = [
    "ControlProblem",
    "DesignProblem",
    "tletter_problem",
    "iletter_problem",
    "thickness_problem",
    "PRESET_NAMES",
]

PRESET_NAMES = ("tletter", "iletter", "iletter-reg", "thickness-shear", "thickness-disp")


@dataclass
class ControlProblem:
    """Shape-control problem: recover the control that reproduces a desired state."""

    label: str
    mesh: Mesh
    loadcase: LoadCase
    control: ControlParam
    desired: Configuration
    desired_x: np.ndarray
    newton: NewtonOptions
    warm: Configuration


@dataclass
class DesignProblem:
    """Thickness-design problem over a box of per-element section heights."""

    label: str
    mesh: Mesh
    loadcase: LoadCase
    design: DesignParam
    cost: DesignCostModel
    newton: NewtonOptions
    reference_values: np.ndarray


def _curved_cantilever(tail_length: float, section: SectionLaw) -> tuple[Mesh, int, int]:
    """Clamped semicircle (diameter 10, 4 elements) plus a straight tail (3 elements).

    Returns the welded mesh, the junction node (end of the curved part) and
    the tail tip node.
    """
    arc = arc_mesh(
        radius=5.0,
        sweep=-np.pi,
        n_elements=4,
        section=section,
        start=(0.0, 0.0),
        start_angle=np.pi / 2,
    )
    tail = straight_mesh(
        tail_length,
        3,
        section,
        start=(float(arc.nodes[-1, 0]), float(arc.nodes[-1, 1])),
        angle=float(arc.node_angles[-1]),
        clamp_start=False,
    )
    mesh = join_meshes(arc, tail)
    junction = arc.n_nodes - 1
    tip = mesh.n_nodes - 1
    return mesh, junction, tip


def tletter_problem(
    bounds=((10.0, 60.0), (175.0, 225.0)),
    alpha: float = 0.0,
    load_steps: int = 10,
) -> ControlProblem:
    section = SectionLaw(young=12000.0, shear=6000.0, geometry=RectangularGeometry(1.0, 1.0))
    mesh, junction, _ = _curved_cantilever(10.0, section)
    loadcase = LoadCase(
        control=(
            LoadPattern(forces=(PointForce(junction, (0.0, 1.0)),)),
            LoadPattern(moments=(PointMoment(junction, 1.0),)),
        )
    )
    control = ControlParam(bounds=np.asarray(bounds), alpha=alpha)
    newton = NewtonOptions(load_steps=load_steps)
    desired_x = np.array([40.0, 205.0])
    desired = newton_solve(mesh, loadcase, nu=desired_x, options=newton).config
    return ControlProblem(
        label="tletter",
        mesh=mesh,
        loadcase=loadcase,
        control=control,
        desired=desired,
        desired_x=desired_x,
        newton=newton,
        warm=desired,
    )


def iletter_problem(
    regularized: bool = False,
    couple: str = "point",
    bounds=None,
    alpha: float | None = None,
    load_steps: int = 10,
) -> ControlProblem:
    """Curved cantilever with a length-2 bar, moment + follower-force couple.

    couple
        ``point``: the two follower forces act across a rigid lever of arm 2
        attached at the end of the curved part; each force contributes a
        half-lever torque, so the pair is statically a pure couple 2F that
        never loads the bar span.  ``distributed``: the forces act at the two
        end nodes of the flexible bar itself, which additionally bends it.
    """
    if couple not in ("point", "distributed"):
        raise ValueError(f"unknown couple realization {couple!r}")
    section = SectionLaw(young=12000.0, shear=6000.0, geometry=RectangularGeometry(1.0, 1.0))
    mesh, junction, tip = _curved_cantilever(2.0, section)
    moment_col = LoadPattern(moments=(PointMoment(junction, 1.0),))
    if couple == "point":
        half_lever = LoadPattern(moments=(PointMoment(junction, 1.0),))
        columns = (half_lever, half_lever, moment_col)
    else:
        columns = (
            LoadPattern(followers=(FollowerForce(junction, (0.0, -1.0)),)),
            LoadPattern(followers=(FollowerForce(tip, (0.0, 1.0)),)),
            moment_col,
        )
    loadcase = LoadCase(control=columns)
    if bounds is None:
        bounds = ((0.0, 230.0), (0.0, 230.0)) if regularized else ((0.0, 60.0), (0.0, 230.0))
    if alpha is None:
        alpha = 1e-9 if regularized else 0.0
    # one optimization variable drives both physical forces of the couple
    expansion = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    control = ControlParam(bounds=np.asarray(bounds), expansion=expansion, alpha=alpha)
    newton = NewtonOptions(load_steps=load_steps)
    desired_x = np.array([0.0, 205.4])
    desired = newton_solve(mesh, loadcase, nu=control.expand(desired_x), options=newton).config
    return ControlProblem(
        label="iletter-reg" if regularized else "iletter",
        mesh=mesh,
        loadcase=loadcase,
        control=control,
        desired=desired,
        desired_x=desired_x,
        newton=newton,
        warm=desired,
    )


def thickness_problem(
    cost_kind: str = "shear-energy-max",
    penalty_weight: float | None = None,
    mass_limit: float = 30000.0,
    load_steps: int = 5,
) -> DesignProblem:
    """Four-element thickness design of a tip-loaded shear-deformable cantilever.

    The geometry (L=1000 in four equal elements) reproduces the mass
    identity M = 250 * sum(h_i) with rho = 1/30 and b = 30, so the nominal
    uniform thickness 30 sits exactly at the mass limit 30000.  The shear
    correction factor 5/6 of the rectangular section is part of the
    experiment definition.
    """
    section = SectionLaw(
        young=75000.0,
        shear=50000.0,
        geometry=RectangularGeometry(30.0, 30.0),
        shear_correction=5.0 / 6.0,
    )
    mesh = straight_mesh(1000.0, 4, section)
    tip = mesh.n_nodes - 1
    loadcase = LoadCase(base=LoadPattern(forces=(PointForce(tip, (0.0, -1000.0)),)))
    if cost_kind == "shear-energy-max":
        bounds = np.array([[30.0, 60.0], [30.0, 60.0], [15.0, 35.0], [15.0, 35.0]])
        weight = 0.02 if penalty_weight is None else penalty_weight
        label = "thickness-shear"
    elif cost_kind == "displacement-norm":
        bounds = np.array([[30.0, 60.0], [30.0, 60.0], [15.0, 35.0], [5.0, 25.0]])
        weight = 1.0 if penalty_weight is None else penalty_weight
        label = "thickness-disp"
    else:
        raise ValueError(f"unknown design cost {cost_kind!r}")
    design = DesignParam(mode="element-dimension", bounds=bounds)
    cost = DesignCostModel(kind=cost_kind, rho=1.0 / 30.0, mass_limit=mass_limit, penalty_weight=weight)
    return DesignProblem(
        label=label,
        mesh=mesh,
        loadcase=loadcase,
        design=design,
        cost=cost,
        newton=NewtonOptions(load_steps=load_steps),
        reference_values=np.full(4, 30.0),
    )
