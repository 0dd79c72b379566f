"""Stacked optimality systems coupling equilibrium with design/control.

The residual carries three blocks on the free dofs: equilibrium
``r_lambda = f_int - f_ext``, adjoint stationarity
``r_phi = dJ/dphi + K^T lambda`` and the control/design stationarity
block.  All blocks use the exact gradients of the implemented discrete
cost, so a root of the stacked system coincides with the optimum of the
sequential formulation.  Eliminating the multipliers through the adjoint
solve turns the stationarity block into the reduced gradient of the cost
along the equilibrium manifold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import residual, tangent_matrix
from .costs import shape_matching_gradient
from .design import ControlParam, DesignCostModel, DesignParam, design_sensitivity_fint, section_arrays
from .errors import SingularTangentError
from .loads import LoadCase, control_matrix
from .mesh import Configuration, Mesh

__all__ = [
    "KktResidual",
    "kkt_residual_control",
    "kkt_residual_design",
    "eliminate_multipliers",
    "adjoint_control_gradient",
    "adjoint_design_gradient",
    "merit_least_squares",
    "bound_box_from_reference",
]


@dataclass(frozen=True)
class KktResidual:
    """Residual blocks (equilibrium, adjoint, variable stationarity)."""

    r_lambda: np.ndarray
    r_phi: np.ndarray
    r_x: np.ndarray

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.r_lambda, self.r_phi, self.r_x])

    @property
    def merit(self) -> float:
        s = self.stacked()
        return float(s @ s)

    @property
    def max_norm(self) -> float:
        return float(np.abs(self.stacked()).max())


def merit_least_squares(kkt: KktResidual) -> float:
    """Sum of squared residual entries; zero exactly at a stationarity point."""
    return kkt.merit


def _solve_adjoint(K_ff: np.ndarray, grad_free: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(K_ff.T, -grad_free)
    except np.linalg.LinAlgError as exc:
        raise SingularTangentError("equilibrium tangent singular in adjoint solve") from exc


def kkt_residual_control(
    mesh: Mesh,
    loadcase: LoadCase,
    config: Configuration,
    x: np.ndarray,
    lam: np.ndarray,
    desired: Configuration,
    control: ControlParam,
    props=None,
) -> KktResidual:
    """Stacked residual of the optimal-control problem at (config, x, lam)."""
    free = mesh.free_dofs
    nu = control.expand(x)
    r_lam = residual(mesh, config, loadcase, nu, props)[free]
    K_ff = tangent_matrix(mesh, config, props, loadcase, nu)[np.ix_(free, free)]
    g = shape_matching_gradient(mesh, config, desired)[free]
    r_phi = g + K_ff.T @ lam
    F0 = control_matrix(mesh, loadcase, config)[free]
    if control.expansion is not None:
        F0 = F0 @ control.expansion
    r_x = control.regularization_gradient(x) - F0.T @ lam
    return KktResidual(r_lam, r_phi, r_x)


def eliminate_multipliers(
    mesh: Mesh,
    loadcase: LoadCase,
    config: Configuration,
    x: np.ndarray,
    desired: Configuration,
    control: ControlParam,
    props=None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reduced residual in (config, x) after substituting the adjoint multipliers.

    Returns ``(r_lambda, r_x_reduced, lam)`` where ``lam`` solves the adjoint
    block exactly, so the reduced pair vanishes together with the full
    stacked system.
    """
    free = mesh.free_dofs
    nu = control.expand(x)
    r_lam = residual(mesh, config, loadcase, nu, props)[free]
    K_ff = tangent_matrix(mesh, config, props, loadcase, nu)[np.ix_(free, free)]
    g = shape_matching_gradient(mesh, config, desired)[free]
    lam = _solve_adjoint(K_ff, g)
    F0 = control_matrix(mesh, loadcase, config)[free]
    if control.expansion is not None:
        F0 = F0 @ control.expansion
    r_x = control.regularization_gradient(x) - F0.T @ lam
    return r_lam, r_x, lam


def adjoint_control_gradient(
    mesh: Mesh,
    loadcase: LoadCase,
    config: Configuration,
    x: np.ndarray,
    desired: Configuration,
    control: ControlParam,
    props=None,
) -> np.ndarray:
    """Reduced cost gradient d/dx of the regularized shape-matching cost.

    ``config`` must be the converged equilibrium at ``x``; the adjoint is
    solved with the transposed tangent so follower loads are handled
    exactly.
    """
    _, r_x, _ = eliminate_multipliers(mesh, loadcase, config, x, desired, control, props)
    return r_x


def kkt_residual_design(
    mesh: Mesh,
    loadcase: LoadCase,
    config: Configuration,
    values: np.ndarray,
    lam: np.ndarray,
    design: DesignParam,
    cost: DesignCostModel,
    nu: np.ndarray | None = None,
) -> KktResidual:
    """Stacked residual of the optimal-design problem at (config, values, lam)."""
    free = mesh.free_dofs
    arrays = section_arrays(mesh, design, values)
    r_lam = residual(mesh, config, loadcase, nu, arrays.props)[free]
    K_ff = tangent_matrix(mesh, config, arrays.props, loadcase, nu)[np.ix_(free, free)]
    g = cost.state_gradient(mesh, config, design, values, arrays)[free]
    r_phi = g + K_ff.T @ lam
    dfint = design_sensitivity_fint(mesh, config, design, values)[free]
    r_d = cost.design_gradient(mesh, config, design, values, arrays) + dfint.T @ lam
    return KktResidual(r_lam, r_phi, r_d)


def adjoint_design_gradient(
    mesh: Mesh,
    loadcase: LoadCase,
    config: Configuration,
    values: np.ndarray,
    design: DesignParam,
    cost: DesignCostModel,
    nu: np.ndarray | None = None,
) -> np.ndarray:
    """Reduced cost gradient d/dd at a converged equilibrium state."""
    free = mesh.free_dofs
    arrays = section_arrays(mesh, design, values)
    K_ff = tangent_matrix(mesh, config, arrays.props, loadcase, nu)[np.ix_(free, free)]
    g = cost.state_gradient(mesh, config, design, values, arrays)[free]
    lam = _solve_adjoint(K_ff, g)
    dfint = design_sensitivity_fint(mesh, config, design, values)[free]
    return cost.design_gradient(mesh, config, design, values, arrays) + dfint.T @ lam


def bound_box_from_reference(reference: np.ndarray, ep: float, floor: float = 1e-12) -> np.ndarray:
    """Per-component interval ``[c - ep |c|, c + ep |c|]`` around a reference vector.

    Components smaller than ``floor`` in magnitude get the symmetric
    absolute interval ``[-ep, +ep]`` so the box never collapses.
    """
    if ep <= 0.0:
        raise ValueError("ep must be positive")
    ref = np.asarray(reference, dtype=float)
    tiny = np.abs(ref) < floor
    half = ep * np.abs(ref)
    lo = np.where(tiny, -ep, ref - half)
    hi = np.where(tiny, ep, ref + half)
    return np.stack([lo, hi], axis=-1)
