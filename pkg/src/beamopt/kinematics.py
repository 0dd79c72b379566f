"""Strain measures of the geometrically exact beam.

The planar strain routine works on a single interpolation point of one
element and is the scalar specialization used by the assembled solver;
the 3D virtual-strain operator is provided as a standalone utility with
its own finite-difference tests.

Material (cross-section frame) convention throughout: the axial/shear
pair is ``Lambda^T phi'`` and the curvature is the arc-length derivative
of the rotation parameter.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateElementError
from .section import Strains2D
from .so3 import rotation_2d

__all__ = [
    "planar_strain_measures",
    "material_strains_2d",
    "virtual_strain_operator_3d",
]


def planar_strain_measures(
    positions: np.ndarray,
    angles: np.ndarray,
    shape_values: np.ndarray,
    shape_ds: np.ndarray,
) -> tuple[np.ndarray, float]:
    """Material strain pair ``Lambda^T phi'`` and curvature ``psi'`` at one point.

    Parameters
    ----------
    positions : (n_en, 2) nodal positions of the element.
    angles : (n_en,) nodal cross-section angles.
    shape_values, shape_ds : shape functions and their arc-length
        derivatives evaluated at the point.
    """
    phi_prime = shape_ds @ positions
    psi = float(shape_values @ angles)
    lam = rotation_2d(psi)
    return lam.T @ phi_prime, float(shape_ds @ angles)


def material_strains_2d(
    positions: np.ndarray,
    angles: np.ndarray,
    ref_positions: np.ndarray,
    ref_angles: np.ndarray,
    shape_values: np.ndarray,
    shape_dxi: np.ndarray,
) -> Strains2D:
    """Planar strains at a quadrature point, referred to the initial geometry.

    Axial/shear strains are ``Lambda^T phi' - e1``; the reference values are
    evaluated identically on the initial geometry so that the undeformed
    state is strain free.  The arc-length metric comes from the reference
    interpolation.

    Raises
    ------
    DegenerateElementError
        If the reference jacobian vanishes.
    """
    jac = float(np.linalg.norm(shape_dxi @ np.asarray(ref_positions, dtype=float)))
    if jac <= 1e-14:
        raise DegenerateElementError(f"reference jacobian {jac:.3e} at evaluation point")
    shape_ds = np.asarray(shape_dxi, dtype=float) / jac

    eps_hat, kappa = planar_strain_measures(
        np.asarray(positions, dtype=float), np.asarray(angles, dtype=float),
        np.asarray(shape_values, dtype=float), shape_ds,
    )
    eps_ref, kappa_ref = planar_strain_measures(
        np.asarray(ref_positions, dtype=float), np.asarray(ref_angles, dtype=float),
        np.asarray(shape_values, dtype=float), shape_ds,
    )
    return Strains2D(
        axial=float(eps_hat[0] - 1.0),
        shear=float(eps_hat[1]),
        curvature=kappa,
        axial_ref=float(eps_ref[0] - 1.0),
        shear_ref=float(eps_ref[1]),
        curvature_ref=kappa_ref,
    )


def virtual_strain_operator_3d(
    rotation: np.ndarray,
    eps: np.ndarray,
    omega: np.ndarray,
    dphi_prime: np.ndarray,
    dtheta: np.ndarray,
    dtheta_prime: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Gateaux derivative of the 3D strain measures at a point.

    ``d_eps = Lambda^T dphi' + eps x dtheta`` and
    ``d_omega = dtheta' + omega x dtheta`` for a multiplicative rotation
    variation with pseudo-vector ``dtheta``.

    ``eps`` is the translational measure ``Lambda^T phi'`` (no reference
    value subtracted) and ``omega`` the axial vector of ``Lambda^T Lambda'``.
    """
    rotation = np.asarray(rotation, dtype=float)
    d_eps = rotation.T @ np.asarray(dphi_prime, dtype=float) + np.cross(eps, dtheta)
    d_omega = np.asarray(dtheta_prime, dtype=float) + np.cross(omega, dtheta)
    return d_eps, d_omega
