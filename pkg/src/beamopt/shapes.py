"""Lagrange shape functions on the parent interval [-1, 1] and Gauss rules."""

from __future__ import annotations

import numpy as np

__all__ = ["nodal_coordinates", "lagrange_shape", "gauss_rule"]

_MAX_NODES = 4


def nodal_coordinates(n_en: int) -> np.ndarray:
    """Equally spaced nodal natural coordinates for an ``n_en``-node element."""
    if not 2 <= n_en <= _MAX_NODES:
        raise ValueError(f"element node count must be in [2, {_MAX_NODES}], got {n_en}")
    return np.linspace(-1.0, 1.0, n_en)


def lagrange_shape(n_en: int, xi: float) -> tuple[np.ndarray, np.ndarray]:
    """Lagrange polynomial values and their natural derivatives at ``xi``.

    Built from the product formula over the nodal coordinates; values form a
    partition of unity and derivatives sum to zero by construction.

    Raises
    ------
    ValueError
        If ``xi`` lies outside [-1, 1] (beyond a small round-off margin).
    """
    if not -1.0 - 1e-12 <= xi <= 1.0 + 1e-12:
        raise ValueError(f"natural coordinate {xi} outside [-1, 1]")
    nodes = nodal_coordinates(n_en)
    values = np.ones(n_en)
    derivs = np.zeros(n_en)
    for a in range(n_en):
        for b in range(n_en):
            if b == a:
                continue
            values[a] *= (xi - nodes[b]) / (nodes[a] - nodes[b])
        # derivative of the product: sum over the factor being differentiated
        for c in range(n_en):
            if c == a:
                continue
            term = 1.0 / (nodes[a] - nodes[c])
            for b in range(n_en):
                if b in (a, c):
                    continue
                term *= (xi - nodes[b]) / (nodes[a] - nodes[b])
            derivs[a] += term
    return values, derivs


def gauss_rule(n_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre abscissas and weights on [-1, 1]."""
    if n_points < 1:
        raise ValueError("at least one quadrature point is required")
    return np.polynomial.legendre.leggauss(n_points)
