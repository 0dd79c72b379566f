"""Residual and tangent assembly for the planar geometrically exact beam.

All kernels are vectorized over (element, quadrature point).  The strain
operator rows are ordered (axial, shear, curvature); the tangent is the
exact linearization of the internal force (material + geometric parts)
minus the follower-load contribution when a load case is supplied.
"""

from __future__ import annotations

import numpy as np

from .loads import LoadCase, external_force, external_tangent
from .mesh import Configuration, Mesh

__all__ = [
    "stiffness_arrays",
    "strain_operator",
    "internal_force",
    "tangent_matrix",
    "residual",
    "assemble_system",
    "strain_energy",
    "element_residual",
    "element_tangent",
    "element_potential",
]


def stiffness_arrays(mesh: Mesh, props=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Normalize the optional stiffness override to the (EA, kGA, EI) triple."""
    if props is None:
        return mesh.section_stiffness_arrays()
    ea, ga, ei = props
    return np.asarray(ea, float), np.asarray(ga, float), np.asarray(ei, float)


def strain_operator(mesh: Mesh, kin) -> np.ndarray:
    """B array of shape (n_el, n_quad, 3, 3*n_en) mapping dof variations to strains."""
    n_el, n_q, n_en = mesh.n_elements, mesh.n_quad, mesh.nodes_per_element
    c, s = kin["cos"], kin["sin"]
    eps_hat = kin["eps_hat"]
    N = np.broadcast_to(mesh.shape_values[None, :, :], (n_el, n_q, n_en))
    dN = mesh.shape_ds
    B = np.zeros((n_el, n_q, 3, 3 * n_en))
    B[:, :, 0, 0::3] = c[..., None] * dN
    B[:, :, 0, 1::3] = s[..., None] * dN
    B[:, :, 0, 2::3] = eps_hat[..., 1, None] * N
    B[:, :, 1, 0::3] = -s[..., None] * dN
    B[:, :, 1, 1::3] = c[..., None] * dN
    B[:, :, 1, 2::3] = -eps_hat[..., 0, None] * N
    B[:, :, 2, 2::3] = dN
    return B


def _stress(mesh: Mesh, kin, props) -> np.ndarray:
    """Stress resultants (n1, n2, m) per (element, quadrature point)."""
    ea, ga, ei = props
    return np.stack(
        [ea * kin["eps"][..., 0], ga * kin["eps"][..., 1], ei * kin["kappa"]],
        axis=-1,
    )


def _element_internal_forces(mesh: Mesh, config: Configuration, props) -> np.ndarray:
    kin = mesh.element_kinematics(config)
    B = strain_operator(mesh, kin)
    sigma = _stress(mesh, kin, props)
    return np.einsum("eqij,eqi,eq->ej", B, sigma, mesh.weights)


def internal_force(mesh: Mesh, config: Configuration, props=None) -> np.ndarray:
    """Assembled internal force vector of length ``mesh.n_dofs``."""
    props = stiffness_arrays(mesh, props)
    fe = _element_internal_forces(mesh, config, props)
    out = np.zeros(mesh.n_dofs)
    np.add.at(out, mesh.dofmap.ravel(), fe.ravel())
    return out


def _element_tangents(mesh: Mesh, config: Configuration, props, kin=None, B=None, sigma=None) -> np.ndarray:
    kin = kin if kin is not None else mesh.element_kinematics(config)
    B = B if B is not None else strain_operator(mesh, kin)
    sigma = sigma if sigma is not None else _stress(mesh, kin, props)
    ea, ga, ei = props
    D = np.stack([ea, ga, ei], axis=-1)  # (n_el, n_q, 3)
    jw = mesh.weights
    K = np.einsum("eqia,eqi,eqib,eq->eab", B, D, B, jw)

    # geometric part
    n1, n2 = sigma[..., 0], sigma[..., 1]
    c, s = kin["cos"], kin["sin"]
    g1 = -(c * n2 + s * n1)  # Lambda S n, first component
    g2 = c * n1 - s * n2
    eps_hat = kin["eps_hat"]
    n_dot_eps = n1 * eps_hat[..., 0] + n2 * eps_hat[..., 1]
    N = np.broadcast_to(mesh.shape_values[None, :, :], mesh.shape_ds.shape)
    dN = mesh.shape_ds
    # (phi_a, psi_b) blocks and their transposes, then the (psi, psi) block
    blk_x = np.einsum("eq,eqa,eqb->eab", g1 * jw, dN, N)
    blk_y = np.einsum("eq,eqa,eqb->eab", g2 * jw, dN, N)
    blk_pp = np.einsum("eq,eqa,eqb->eab", -n_dot_eps * jw, N, N)
    K[:, 0::3, 2::3] += blk_x
    K[:, 1::3, 2::3] += blk_y
    K[:, 2::3, 0::3] += np.swapaxes(blk_x, 1, 2)
    K[:, 2::3, 1::3] += np.swapaxes(blk_y, 1, 2)
    K[:, 2::3, 2::3] += blk_pp
    return K


def tangent_matrix(
    mesh: Mesh,
    config: Configuration,
    props=None,
    loadcase: LoadCase | None = None,
    nu: np.ndarray | None = None,
    load_scale: float = 1.0,
) -> np.ndarray:
    """Global tangent of the residual ``f_int - load_scale * f_ext``."""
    props = stiffness_arrays(mesh, props)
    Ke = _element_tangents(mesh, config, props)
    K = np.zeros(mesh.n_dofs * mesh.n_dofs)
    np.add.at(K, mesh._scatter_idx, Ke.ravel())
    K = K.reshape(mesh.n_dofs, mesh.n_dofs)
    if loadcase is not None:
        K -= load_scale * external_tangent(mesh, loadcase, config, nu)
    return K


def residual(
    mesh: Mesh,
    config: Configuration,
    loadcase: LoadCase | None = None,
    nu: np.ndarray | None = None,
    props=None,
    load_scale: float = 1.0,
) -> np.ndarray:
    """Out-of-balance force ``f_int - load_scale * f_ext`` (full dof vector)."""
    r = internal_force(mesh, config, props)
    if loadcase is not None:
        r -= load_scale * external_force(mesh, loadcase, config, nu)
    return r


def assemble_system(
    mesh: Mesh,
    config: Configuration,
    loadcase: LoadCase | None = None,
    nu: np.ndarray | None = None,
    props=None,
    load_scale: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Residual and tangent in one pass (shared kinematics evaluation)."""
    props = stiffness_arrays(mesh, props)
    kin = mesh.element_kinematics(config)
    B = strain_operator(mesh, kin)
    sigma = _stress(mesh, kin, props)
    fe = np.einsum("eqij,eqi,eq->ej", B, sigma, mesh.weights)
    r = np.zeros(mesh.n_dofs)
    np.add.at(r, mesh.dofmap.ravel(), fe.ravel())
    Ke = _element_tangents(mesh, config, props, kin=kin, B=B, sigma=sigma)
    K = np.zeros(mesh.n_dofs * mesh.n_dofs)
    np.add.at(K, mesh._scatter_idx, Ke.ravel())
    K = K.reshape(mesh.n_dofs, mesh.n_dofs)
    if loadcase is not None:
        r -= load_scale * external_force(mesh, loadcase, config, nu)
        K -= load_scale * external_tangent(mesh, loadcase, config, nu)
    return r, K


def strain_energy(mesh: Mesh, config: Configuration, props=None) -> float:
    """Quadratic stored energy of the relative strain state."""
    props = stiffness_arrays(mesh, props)
    kin = mesh.element_kinematics(config)
    ea, ga, ei = props
    density = (
        ea * kin["eps"][..., 0] ** 2
        + ga * kin["eps"][..., 1] ** 2
        + ei * kin["kappa"] ** 2
    )
    return 0.5 * float((density * mesh.weights).sum())


# ---------------------------------------------------------------------------
# single-element views (test and inspection API)
# ---------------------------------------------------------------------------


def _gather_element_external(
    mesh: Mesh, config: Configuration, element: int, loadcase: LoadCase, nu
) -> np.ndarray:
    """External force restricted to one element's dofs.

    Nodal loads are returned in full; when assembling by hand over shared
    nodes the caller must avoid double counting (the global routines handle
    loads globally instead).
    """
    full = external_force(mesh, loadcase, config, nu)
    return full[mesh.dofmap[element]]


def element_residual(
    mesh: Mesh,
    config: Configuration,
    element: int,
    loadcase: LoadCase | None = None,
    nu: np.ndarray | None = None,
    props=None,
    load_scale: float = 1.0,
) -> np.ndarray:
    props = stiffness_arrays(mesh, props)
    fe = _element_internal_forces(mesh, config, props)[element]
    if loadcase is not None:
        fe = fe - load_scale * _gather_element_external(mesh, config, element, loadcase, nu)
    return fe


def element_tangent(
    mesh: Mesh,
    config: Configuration,
    element: int,
    loadcase: LoadCase | None = None,
    nu: np.ndarray | None = None,
    props=None,
    load_scale: float = 1.0,
) -> np.ndarray:
    props = stiffness_arrays(mesh, props)
    Ke = _element_tangents(mesh, config, props)[element]
    if loadcase is not None:
        dofs = mesh.dofmap[element]
        Kext = external_tangent(mesh, loadcase, config, nu)
        Ke = Ke - load_scale * Kext[np.ix_(dofs, dofs)]
    return Ke


def element_potential(
    mesh: Mesh,
    config: Configuration,
    element: int,
    loadcase: LoadCase | None = None,
    nu: np.ndarray | None = None,
    props=None,
    load_scale: float = 1.0,
) -> float:
    """Element share of the total potential energy (dead loads only).

    Follower forces have no potential; passing a load case containing
    followers on this element's nodes is rejected.
    """
    props = stiffness_arrays(mesh, props)
    kin = mesh.element_kinematics(config)
    ea, ga, ei = props
    density = (
        ea[element] * kin["eps"][element, :, 0] ** 2
        + ga[element] * kin["eps"][element, :, 1] ** 2
        + ei[element] * kin["kappa"][element] ** 2
    )
    value = 0.5 * float((density * mesh.weights[element]).sum())
    if loadcase is not None:
        element_nodes = set(int(n) for n in mesh.elements[element])
        for pattern in (loadcase.base, *loadcase.control):
            if any(f.node in element_nodes for f in pattern.followers):
                raise ValueError("follower forces carry no potential energy")
        fext = _gather_element_external(mesh, config, element, loadcase, nu)
        dofs = mesh.dofmap[element]
        value -= load_scale * float(fext @ config.dof_vector()[dofs])
    return value
