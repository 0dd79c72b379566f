"""External loading: dead point loads, follower forces and control patterns.

A :class:`LoadPattern` is a unit load distribution.  A :class:`LoadCase`
carries a base pattern plus one pattern per control column; the applied
load is ``base + sum(nu_i * column_i)`` where ``nu`` is the control
vector.  Follower forces are given in the body frame of the node they
are attached to and rotate with that cross-section, which makes the
external force state dependent and contributes a (generally
nonsymmetric) term to the tangent operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import Configuration, Mesh
from .so3 import rotation_2d

__all__ = [
    "PointForce",
    "PointMoment",
    "FollowerForce",
    "LoadPattern",
    "LoadCase",
    "follower_load_work",
    "external_force",
    "external_tangent",
    "control_matrix",
]


@dataclass(frozen=True)
class PointForce:
    node: int
    vector: tuple[float, float]


@dataclass(frozen=True)
class PointMoment:
    node: int
    value: float


@dataclass(frozen=True)
class FollowerForce:
    """Force of fixed body-frame direction attached to one cross-section."""

    node: int
    body_vector: tuple[float, float]


@dataclass(frozen=True)
class LoadPattern:
    forces: tuple[PointForce, ...] = ()
    moments: tuple[PointMoment, ...] = ()
    followers: tuple[FollowerForce, ...] = ()

    def nodes(self) -> set[int]:
        return (
            {f.node for f in self.forces}
            | {m.node for m in self.moments}
            | {f.node for f in self.followers}
        )


@dataclass(frozen=True)
class LoadCase:
    """Base loads plus control columns scaled by the control vector."""

    base: LoadPattern = field(default_factory=LoadPattern)
    control: tuple[LoadPattern, ...] = ()

    @property
    def n_control(self) -> int:
        return len(self.control)

    def validate(self, mesh: Mesh) -> None:
        for pattern in (self.base, *self.control):
            for node in pattern.nodes():
                if not 0 <= node < mesh.n_nodes:
                    raise ValueError(f"load references nonexistent node {node}")


def follower_load_work(angle: float, body_vector) -> tuple[np.ndarray, np.ndarray]:
    """Rotated follower force and its derivative with respect to the node angle.

    Returns ``(R(angle) p0, d/dangle R(angle) p0)``; the derivative is the
    2x1 tangent block in the node's rotation column.
    """
    p0 = np.asarray(body_vector, dtype=float)
    force = rotation_2d(angle) @ p0
    return force, np.array([-force[1], force[0]])


def _pattern_force(pattern: LoadPattern, config: Configuration, out: np.ndarray) -> None:
    for pf in pattern.forces:
        out[3 * pf.node : 3 * pf.node + 2] += pf.vector
    for pm in pattern.moments:
        out[3 * pm.node + 2] += pm.value
    for fl in pattern.followers:
        force, _ = follower_load_work(config.angles[fl.node], fl.body_vector)
        out[3 * fl.node : 3 * fl.node + 2] += force


def external_force(
    mesh: Mesh, loadcase: LoadCase, config: Configuration, nu: np.ndarray | None = None
) -> np.ndarray:
    """Assembled external force vector ``base + F0(config) nu``."""
    out = np.zeros(mesh.n_dofs)
    _pattern_force(loadcase.base, config, out)
    if loadcase.control:
        if nu is None:
            raise ValueError("load case has control columns but no control vector given")
        nu = np.asarray(nu, dtype=float)
        if nu.shape != (loadcase.n_control,):
            raise ValueError(f"control vector has length {nu.size}, expected {loadcase.n_control}")
        for value, pattern in zip(nu, loadcase.control):
            scaled = np.zeros(mesh.n_dofs)
            _pattern_force(pattern, config, scaled)
            out += value * scaled
    return out


def external_tangent(
    mesh: Mesh, loadcase: LoadCase, config: Configuration, nu: np.ndarray | None = None
) -> np.ndarray:
    """Derivative of the external force with respect to the dofs.

    Only follower forces contribute; each adds a 2x1 block in the rotation
    column of its node.
    """
    out = np.zeros((mesh.n_dofs, mesh.n_dofs))

    def add(pattern: LoadPattern, scale: float):
        for fl in pattern.followers:
            _, dforce = follower_load_work(config.angles[fl.node], fl.body_vector)
            out[3 * fl.node : 3 * fl.node + 2, 3 * fl.node + 2] += scale * dforce

    add(loadcase.base, 1.0)
    if loadcase.control:
        nu = np.asarray(nu, dtype=float)
        for value, pattern in zip(nu, loadcase.control):
            add(pattern, float(value))
    return out


def control_matrix(mesh: Mesh, loadcase: LoadCase, config: Configuration) -> np.ndarray:
    """Load influence matrix F0(config): one assembled column per control pattern."""
    cols = np.zeros((mesh.n_dofs, loadcase.n_control))
    for j, pattern in enumerate(loadcase.control):
        _pattern_force(pattern, config, cols[:, j])
    return cols
