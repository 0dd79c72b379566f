"""Planar beam mesh, configurations and geometry builders.

Degrees of freedom are ordered (x, y, psi) per node, so dof ``3 a + c``
addresses component ``c`` of node ``a``.  A mesh stores the reference
geometry (positions and cross-section angles), connectivity, one section
law per element, the prescribed dofs, and precomputes everything the
assembly kernels need: shape values, arc-length derivatives, jacobians
and the reference strain measures that make the initial state stress
free.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateElementError
from .section import SectionLaw
from .shapes import gauss_rule, lagrange_shape
from .so3 import rotation_2d

__all__ = ["Mesh", "Configuration", "reference_configuration", "straight_mesh", "arc_mesh", "join_meshes"]


@dataclass
class Configuration:
    """Deformed state: nodal positions and cross-section angles."""

    positions: np.ndarray  # (n_nodes, 2)
    angles: np.ndarray  # (n_nodes,)

    def copy(self) -> "Configuration":
        return Configuration(self.positions.copy(), self.angles.copy())

    @property
    def n_nodes(self) -> int:
        return self.positions.shape[0]

    def dof_vector(self) -> np.ndarray:
        """Flat dof vector of length ``3 * n_nodes`` in (x, y, psi) node order."""
        out = np.empty(3 * self.n_nodes)
        out[0::3] = self.positions[:, 0]
        out[1::3] = self.positions[:, 1]
        out[2::3] = self.angles
        return out

    @classmethod
    def from_dof_vector(cls, vec: np.ndarray) -> "Configuration":
        vec = np.asarray(vec, dtype=float)
        positions = np.stack([vec[0::3], vec[1::3]], axis=1)
        return cls(positions, vec[2::3].copy())


@dataclass(eq=False)
class Mesh:
    """Reference geometry + connectivity with precomputed quadrature data.

    Parameters
    ----------
    nodes : (n_nodes, 2) reference positions.
    node_angles : (n_nodes,) reference cross-section angles.
    elements : (n_el, n_en) connectivity; every element has the same node count.
    sections : one SectionLaw per element.
    fixed_dofs : map dof index -> prescribed value.
    n_quad : Gauss points per element (1 = reduced integration for 2-node
        elements, the default; full integration is selected by passing the
        node count).
    """

    nodes: np.ndarray
    node_angles: np.ndarray
    elements: np.ndarray
    sections: tuple[SectionLaw, ...]
    fixed_dofs: dict[int, float] = field(default_factory=dict)
    n_quad: int = 1

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.node_angles = np.asarray(self.node_angles, dtype=float)
        self.elements = np.asarray(self.elements, dtype=int)
        self.sections = tuple(self.sections)
        if self.elements.ndim != 2:
            raise ValueError("elements must be a 2D connectivity array")
        if len(self.sections) != self.n_elements:
            raise ValueError("one section law per element is required")
        if self.elements.min() < 0 or self.elements.max() >= self.n_nodes:
            raise ValueError("connectivity references a nonexistent node")
        for dof in self.fixed_dofs:
            if not 0 <= dof < self.n_dofs:
                raise ValueError(f"fixed dof {dof} outside the dof range")
        self._build_tables()

    # -- basic sizes ---------------------------------------------------
    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def nodes_per_element(self) -> int:
        return self.elements.shape[1]

    @property
    def n_dofs(self) -> int:
        return 3 * self.n_nodes

    # -- precomputed tables --------------------------------------------
    def _build_tables(self):
        n_en = self.nodes_per_element
        xi, w = gauss_rule(self.n_quad)
        shape_vals = np.empty((self.n_quad, n_en))
        shape_dxi = np.empty((self.n_quad, n_en))
        for q, x in enumerate(xi):
            shape_vals[q], shape_dxi[q] = lagrange_shape(n_en, x)
        self.quad_points = xi
        self.quad_weights = w
        self.shape_values = shape_vals
        self.shape_dxi = shape_dxi

        conn = self.elements
        ref_pos = self.nodes[conn]  # (n_el, n_en, 2)
        tangent = np.einsum("qa,eai->eqi", shape_dxi, ref_pos)
        jac = np.linalg.norm(tangent, axis=2)  # (n_el, n_quad)
        if np.any(jac <= 1e-14):
            bad = int(np.argwhere(jac <= 1e-14)[0][0])
            raise DegenerateElementError(f"element {bad} has a vanishing jacobian")
        self.jacobians = jac
        self.shape_ds = shape_dxi[None, :, :] / jac[:, :, None]  # (n_el, n_quad, n_en)
        self.weights = jac * w[None, :]  # j(xi) * w per (el, qp)
        self.element_lengths = self.weights.sum(axis=1)

        # dof scatter tables
        dofmap = np.empty((self.n_elements, 3 * n_en), dtype=int)
        for c in range(n_en):
            dofmap[:, 3 * c] = 3 * conn[:, c]
            dofmap[:, 3 * c + 1] = 3 * conn[:, c] + 1
            dofmap[:, 3 * c + 2] = 3 * conn[:, c] + 2
        self.dofmap = dofmap
        self._scatter_idx = (
            dofmap[:, :, None] * self.n_dofs + dofmap[:, None, :]
        ).ravel()

        free = np.setdiff1d(np.arange(self.n_dofs), np.fromiter(self.fixed_dofs, int, len(self.fixed_dofs)))
        self.free_dofs = free

        # reference strain measures, evaluated exactly like the current ones
        ref_ang = self.node_angles[conn]  # (n_el, n_en)
        psi0 = np.einsum("qa,ea->eq", shape_vals, ref_ang)
        phi0p = np.einsum("eqa,eai->eqi", self.shape_ds, ref_pos)
        c, s = np.cos(psi0), np.sin(psi0)
        self.eps_ref = np.stack(
            [c * phi0p[..., 0] + s * phi0p[..., 1], -s * phi0p[..., 0] + c * phi0p[..., 1]],
            axis=-1,
        )  # (n_el, n_quad, 2), material pair Lambda0^T phi0'
        self.kappa_ref = np.einsum("eqa,ea->eq", self.shape_ds, ref_ang)

    # -- stiffness/property arrays ---------------------------------------
    def section_stiffness_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-element stiffness triple (EA, kGA, EI) broadcast over qps."""
        ea = np.empty((self.n_elements, self.n_quad))
        ga = np.empty_like(ea)
        ei = np.empty_like(ea)
        for e, sec in enumerate(self.sections):
            a, g, i = sec.stiffness()
            ea[e], ga[e], ei[e] = a, g, i
        return ea, ga, ei

    def section_areas(self) -> np.ndarray:
        areas = np.empty((self.n_elements, self.n_quad))
        for e, sec in enumerate(self.sections):
            areas[e] = sec.geometry.area
        return areas

    def element_kinematics(self, config: Configuration):
        """Interpolated state at every (element, quadrature point).

        Returns a dict with the material strain pair ``eps`` (relative to the
        reference), the raw pair ``eps_hat = Lambda^T phi'``, the curvature
        difference ``kappa``, and the cos/sin of the section angle.
        """
        conn = self.elements
        pos = config.positions[conn]
        ang = config.angles[conn]
        phi_p = np.einsum("eqa,eai->eqi", self.shape_ds, pos)
        psi = np.einsum("qa,ea->eq", self.shape_values, ang)
        kappa = np.einsum("eqa,ea->eq", self.shape_ds, ang)
        c, s = np.cos(psi), np.sin(psi)
        eps_hat = np.stack(
            [c * phi_p[..., 0] + s * phi_p[..., 1], -s * phi_p[..., 0] + c * phi_p[..., 1]],
            axis=-1,
        )
        return {
            "eps_hat": eps_hat,
            "eps": eps_hat - self.eps_ref,
            "kappa": kappa - self.kappa_ref,
            "cos": c,
            "sin": s,
        }


def reference_configuration(mesh: Mesh) -> Configuration:
    return Configuration(mesh.nodes.copy(), mesh.node_angles.copy())


def apply_rigid_motion(config: Configuration, translation, angle: float, pivot=(0.0, 0.0)) -> Configuration:
    """Superpose a rigid planar motion on a configuration (testing utility)."""
    rot = rotation_2d(angle)
    pivot = np.asarray(pivot, dtype=float)
    pos = (config.positions - pivot) @ rot.T + pivot + np.asarray(translation, dtype=float)
    return Configuration(pos, config.angles + angle)


# ---------------------------------------------------------------------------
# geometry builders
# ---------------------------------------------------------------------------

def _chain_elements(n_nodes_total: int, n_en: int) -> np.ndarray:
    n_el = (n_nodes_total - 1) // (n_en - 1)
    conn = np.empty((n_el, n_en), dtype=int)
    for e in range(n_el):
        start = e * (n_en - 1)
        conn[e] = np.arange(start, start + n_en)
    return conn


def straight_mesh(
    length: float,
    n_elements: int,
    section: SectionLaw,
    start=(0.0, 0.0),
    angle: float = 0.0,
    n_en: int = 2,
    n_quad: int | None = None,
    clamp_start: bool = True,
) -> Mesh:
    """Uniform straight cantilever mesh pointing along ``angle``."""
    n_nodes = n_elements * (n_en - 1) + 1
    s = np.linspace(0.0, length, n_nodes)
    direction = np.array([np.cos(angle), np.sin(angle)])
    nodes = np.asarray(start, dtype=float)[None, :] + s[:, None] * direction[None, :]
    angles = np.full(n_nodes, angle)
    conn = _chain_elements(n_nodes, n_en)
    fixed = {0: nodes[0, 0], 1: nodes[0, 1], 2: angle} if clamp_start else {}
    return Mesh(
        nodes,
        angles,
        conn,
        (section,) * conn.shape[0],
        fixed_dofs=fixed,
        n_quad=n_quad if n_quad is not None else n_en - 1,
    )


def arc_mesh(
    radius: float,
    sweep: float,
    n_elements: int,
    section: SectionLaw,
    start=(0.0, 0.0),
    start_angle: float = 0.0,
    n_en: int = 2,
    n_quad: int | None = None,
    clamp_start: bool = True,
) -> Mesh:
    """Circular-arc mesh with signed total turning angle ``sweep``.

    The beam leaves ``start`` with tangent direction ``start_angle`` and
    turns by ``sweep`` over its arc length; node angles are exact tangent
    directions so the initial state is internal-force free.
    """
    if sweep == 0.0:
        raise ValueError("sweep must be nonzero; use straight_mesh instead")
    n_nodes = n_elements * (n_en - 1) + 1
    kappa0 = np.sign(sweep) / radius
    arc_length = abs(sweep) * radius
    s = np.linspace(0.0, arc_length, n_nodes)
    psi = start_angle + kappa0 * s
    # integral of (cos psi, sin psi) ds along the arc
    x = (np.sin(psi) - np.sin(start_angle)) / kappa0
    y = -(np.cos(psi) - np.cos(start_angle)) / kappa0
    nodes = np.asarray(start, dtype=float)[None, :] + np.stack([x, y], axis=1)
    conn = _chain_elements(n_nodes, n_en)
    fixed = {0: nodes[0, 0], 1: nodes[0, 1], 2: psi[0]} if clamp_start else {}
    return Mesh(
        nodes,
        psi,
        conn,
        (section,) * conn.shape[0],
        fixed_dofs=fixed,
        n_quad=n_quad if n_quad is not None else n_en - 1,
    )


def join_meshes(first: Mesh, second: Mesh) -> Mesh:
    """Weld the first node of ``second`` onto the last node of ``first``.

    The second mesh is expected to have been built so that its first node
    coincides (position and angle) with the last node of the first mesh;
    its boundary conditions are discarded.
    """
    if first.nodes_per_element != second.nodes_per_element:
        raise ValueError("meshes must share the element node count")
    if not np.allclose(first.nodes[-1], second.nodes[0], atol=1e-10):
        raise ValueError("meshes do not share the junction node position")
    if abs(first.node_angles[-1] - second.node_angles[0]) > 1e-10:
        raise ValueError("meshes do not share the junction tangent angle")
    offset = first.n_nodes - 1
    nodes = np.vstack([first.nodes, second.nodes[1:]])
    angles = np.concatenate([first.node_angles, second.node_angles[1:]])
    conn = np.vstack([first.elements, second.elements + offset])
    sections = first.sections + second.sections
    return Mesh(
        nodes,
        angles,
        conn,
        sections,
        fixed_dofs=dict(first.fixed_dofs),
        n_quad=first.n_quad,
    )
