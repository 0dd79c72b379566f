"""Rotation-group utilities for finite cross-section rotations.

Rotations live in SO(3) and are represented by plain 3x3 numpy arrays;
rotation pseudo-vectors (axial vectors of skew tensors) are length-3
arrays whose norm is the rotation angle in radians.  The planar solver
only needs the scalar specialization of these maps, but the full 3D
kinematics is kept here as a standalone, well-tested toolbox.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "hat",
    "vee",
    "exp_so3",
    "rotation_update",
    "is_rotation",
    "rotation_2d",
]

# Below this angle the sin/cos coefficient ratios of the Rodrigues formula
# are evaluated by their Taylor expansions to avoid 0/0.
_SMALL_ANGLE = 1e-8


def hat(theta: np.ndarray) -> np.ndarray:
    """Skew-symmetric tensor of an axial vector: hat(theta) @ v == cross(theta, v)."""
    t1, t2, t3 = np.asarray(theta, dtype=float)
    return np.array(
        [
            [0.0, -t3, t2],
            [t3, 0.0, -t1],
            [-t2, t1, 0.0],
        ]
    )


def vee(skew: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Axial vector of a skew-symmetric tensor (inverse of :func:`hat`).

    Raises
    ------
    ValueError
        If the symmetric part of ``skew`` exceeds ``tol`` in max norm.
    """
    skew = np.asarray(skew, dtype=float)
    sym = 0.5 * (skew + skew.T)
    defect = float(np.abs(sym).max())
    if defect > tol:
        raise ValueError(f"matrix is not skew-symmetric (symmetric part {defect:.3e})")
    return np.array([skew[2, 1], skew[0, 2], skew[1, 0]])


def exp_so3(theta: np.ndarray) -> np.ndarray:
    """Exponential map so(3) -> SO(3) in closed Rodrigues form.

    Returns ``cos(a) I + sin(a)/a * hat(theta) + (1-cos(a))/a^2 * theta theta^T``
    with ``a = |theta|``; small angles switch to second-order Taylor
    coefficients so the map is smooth through the identity.
    """
    theta = np.asarray(theta, dtype=float)
    angle = float(np.linalg.norm(theta))
    if angle < _SMALL_ANGLE:
        a2 = angle * angle
        sinc = 1.0 - a2 / 6.0
        haver = 0.5 - a2 / 24.0
    else:
        sinc = np.sin(angle) / angle
        haver = (1.0 - np.cos(angle)) / (angle * angle)
    theta_hat = hat(theta)
    return np.eye(3) + sinc * theta_hat + haver * (theta_hat @ theta_hat)


def rotation_update(rotation: np.ndarray, delta_theta: np.ndarray) -> np.ndarray:
    """Multiplicative update of a rotation by an incremental pseudo-vector."""
    return np.asarray(rotation, dtype=float) @ exp_so3(delta_theta)


def is_rotation(mat: np.ndarray, tol: float = 1e-12) -> bool:
    """Check orthogonality and unit determinant within ``tol``."""
    mat = np.asarray(mat, dtype=float)
    ortho = float(np.abs(mat.T @ mat - np.eye(3)).max())
    return ortho < tol and abs(float(np.linalg.det(mat)) - 1.0) < tol


def rotation_2d(angle: float | np.ndarray) -> np.ndarray:
    """Planar rotation matrix; the 2D image of :func:`exp_so3` about the z axis.

    Accepts an array of angles, in which case the result has shape
    ``angle.shape + (2, 2)``.
    """
    c, s = np.cos(angle), np.sin(angle)
    return np.stack(
        [np.stack([c, -s], axis=-1), np.stack([s, c], axis=-1)], axis=-2
    )
