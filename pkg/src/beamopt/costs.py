"""Cost functionals over equilibrium states and their exact gradients.

All quadratures reuse the mesh's integration rule.  Shape matching is the
element-length weighted sum over nodal displacement differences (rotation
dofs carry no cost); the remaining costs are field integrals over the
beam axis.  State gradients are the exact derivatives of the implemented
discrete expressions, which keeps every adjoint/KKT block consistent with
finite differences of the discrete cost.
"""

from __future__ import annotations

import numpy as np

from .assembly import stiffness_arrays
from .mesh import Configuration, Mesh

__all__ = [
    "shape_matching_cost",
    "shape_matching_gradient",
    "regularized_control_cost",
    "volume_and_mass",
    "shear_energy_cost",
    "shear_energy_state_gradient",
    "displacement_norm_cost",
    "displacement_norm_gradient",
    "mass_penalty",
    "mass_penalty_slope",
]


def _check_same_mesh(mesh: Mesh, config: Configuration, desired: Configuration) -> None:
    if config.n_nodes != mesh.n_nodes or desired.n_nodes != mesh.n_nodes:
        raise ValueError("configuration and desired state must live on the given mesh")


def _node_length_weights(mesh: Mesh) -> np.ndarray:
    """Sum of adjacent element lengths per node."""
    w = np.zeros(mesh.n_nodes)
    for a in range(mesh.nodes_per_element):
        np.add.at(w, mesh.elements[:, a], mesh.element_lengths)
    return w


def shape_matching_cost(mesh: Mesh, config: Configuration, desired: Configuration) -> float:
    """Quarter-weighted squared displacement mismatch summed over element nodes.

    ``J = 1/4 sum_e l_e sum_(a in e) |u_a - u_a_desired|^2`` on displacement
    dofs only; zero exactly when all nodal positions match the desired ones.
    """
    _check_same_mesh(mesh, config, desired)
    diff = config.positions - desired.positions
    sq = (diff**2).sum(axis=1)
    return 0.25 * float((_node_length_weights(mesh) * sq).sum())


def shape_matching_gradient(mesh: Mesh, config: Configuration, desired: Configuration) -> np.ndarray:
    """Exact gradient of :func:`shape_matching_cost` over all dofs (rotations zero)."""
    _check_same_mesh(mesh, config, desired)
    diff = config.positions - desired.positions
    w = _node_length_weights(mesh)
    out = np.zeros(mesh.n_dofs)
    out[0::3] = 0.5 * w * diff[:, 0]
    out[1::3] = 0.5 * w * diff[:, 1]
    return out


def regularized_control_cost(
    mesh: Mesh,
    config: Configuration,
    desired: Configuration,
    nu: np.ndarray,
    alpha: float,
) -> float:
    """Shape-matching cost plus ``alpha * nu^T nu`` over the full control vector."""
    if alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    nu = np.asarray(nu, dtype=float)
    return shape_matching_cost(mesh, config, desired) + float(alpha) * float(nu @ nu)


def volume_and_mass(mesh: Mesh, areas: np.ndarray | None = None, rho: float = 1.0) -> tuple[float, float]:
    """Quadrature of the section area: volume and (uniform-density) mass."""
    if areas is None:
        areas = mesh.section_areas()
    volume = float((np.asarray(areas, float) * mesh.weights).sum())
    return volume, rho * volume


def shear_energy_cost(mesh: Mesh, config: Configuration, props=None) -> float:
    """``1/2 integral of kGA * gamma^2`` with gamma the relative shear strain."""
    _, ga, _ = stiffness_arrays(mesh, props)
    kin = mesh.element_kinematics(config)
    gamma = kin["eps"][..., 1]
    return 0.5 * float((ga * gamma**2 * mesh.weights).sum())


def shear_energy_state_gradient(mesh: Mesh, config: Configuration, props=None) -> np.ndarray:
    from .assembly import strain_operator  # local import to avoid a cycle at module load

    _, ga, _ = stiffness_arrays(mesh, props)
    kin = mesh.element_kinematics(config)
    gamma = kin["eps"][..., 1]
    B = strain_operator(mesh, kin)
    fe = np.einsum("eq,eqj,eq->ej", ga * gamma, B[:, :, 1, :], mesh.weights)
    out = np.zeros(mesh.n_dofs)
    np.add.at(out, mesh.dofmap.ravel(), fe.ravel())
    return out


def shear_energy_stiffness_partial(mesh: Mesh, config: Configuration) -> np.ndarray:
    """Partial derivative of the shear energy w.r.t. the kGA entries, per (el, qp)."""
    kin = mesh.element_kinematics(config)
    gamma = kin["eps"][..., 1]
    return 0.5 * gamma**2 * mesh.weights


def displacement_norm_cost(mesh: Mesh, config: Configuration) -> float:
    """``1/2 integral of |phi - x|^2`` over the reference axis."""
    u_nodes = config.positions - mesh.nodes
    u_q = np.einsum("qa,eai->eqi", mesh.shape_values, u_nodes[mesh.elements])
    return 0.5 * float(((u_q**2).sum(axis=2) * mesh.weights).sum())


def displacement_norm_gradient(mesh: Mesh, config: Configuration) -> np.ndarray:
    u_nodes = config.positions - mesh.nodes
    u_q = np.einsum("qa,eai->eqi", mesh.shape_values, u_nodes[mesh.elements])
    ge = np.einsum("eqi,qa,eq->eai", u_q, mesh.shape_values, mesh.weights)
    out = np.zeros(mesh.n_dofs)
    conn = mesh.elements
    np.add.at(out, (3 * conn).ravel(), ge[..., 0].ravel())
    np.add.at(out, (3 * conn + 1).ravel(), ge[..., 1].ravel())
    return out


def mass_penalty(mass: float, limit: float, weight: float) -> float:
    """Quadratic penalty on deviating from the mass budget.

    The limitation acts as a soft equality: designs below the budget are
    penalized as well, otherwise a cost that improves with less material
    (e.g. maximized shear energy) simply drains the mass to the lower
    bounds instead of redistributing it.
    """
    deviation = mass - limit
    return weight * deviation * deviation


def mass_penalty_slope(mass: float, limit: float, weight: float) -> float:
    """d(penalty)/d(mass)."""
    return 2.0 * weight * (mass - limit)
