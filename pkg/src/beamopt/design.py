"""Design and control parameterizations with analytic sensitivities.

Design variables drive the section dimension of the mesh elements either
directly (one thickness or diameter per element group) or through a
low-parameter design-element basis (Bernstein polynomials over the
normalized axis coordinate).  Control variables scale fixed load
patterns; an optional expansion matrix maps optimization variables to
the physical load multipliers so that, e.g., one optimization variable
can drive both forces of a couple while the regularization still counts
each physical force.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .assembly import strain_operator
from .costs import (
    displacement_norm_cost,
    displacement_norm_gradient,
    mass_penalty,
    mass_penalty_slope,
    shape_matching_cost,
    shape_matching_gradient,
    shear_energy_cost,
    shear_energy_state_gradient,
    shear_energy_stiffness_partial,
    volume_and_mass,
)
from .mesh import Configuration, Mesh, reference_configuration


def _undeformed(mesh: Mesh) -> Configuration:
    return reference_configuration(mesh)

__all__ = [
    "ControlParam",
    "DesignParam",
    "SectionArrays",
    "section_arrays",
    "design_sensitivity_fint",
    "DesignCostModel",
    "bernstein_basis",
    "shape_design_volume_gradient",
]


# ---------------------------------------------------------------------------
# control
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ControlParam:
    """Box-bounded control variables and their expansion to load multipliers.

    ``expansion`` has one row per load-case column and one column per
    optimization variable; the identity is used when omitted.
    """

    bounds: np.ndarray  # (n_x, 2)
    expansion: np.ndarray | None = None
    alpha: float = 0.0

    def __post_init__(self):
        bounds = np.atleast_2d(np.asarray(self.bounds, dtype=float))
        object.__setattr__(self, "bounds", bounds)
        if np.any(bounds[:, 0] >= bounds[:, 1]):
            bad = int(np.argwhere(bounds[:, 0] >= bounds[:, 1])[0][0])
            raise ValueError(f"control variable {bad} has an empty box")
        if self.expansion is not None:
            object.__setattr__(self, "expansion", np.asarray(self.expansion, dtype=float))
        if self.alpha < 0.0:
            raise ValueError("alpha must be nonnegative")

    @property
    def n_variables(self) -> int:
        return self.bounds.shape[0]

    def expand(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.expansion is None:
            return x
        return self.expansion @ x

    def regularization(self, x: np.ndarray) -> float:
        nu = self.expand(x)
        return self.alpha * float(nu @ nu)

    def regularization_gradient(self, x: np.ndarray) -> np.ndarray:
        nu = self.expand(x)
        grad_nu = 2.0 * self.alpha * nu
        if self.expansion is None:
            return grad_nu
        return self.expansion.T @ grad_nu


# ---------------------------------------------------------------------------
# design
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DesignParam:
    """Section-dimension design field over the mesh.

    mode
        ``element-dimension``: one design variable per element group
        (thickness for rectangular sections, diameter for circular ones);
        ``element_map`` assigns each element its variable.
        ``design-element``: the dimension varies along the axis as a
        Bernstein combination of the design values.
    """

    mode: str
    bounds: np.ndarray  # (n_d, 2)
    element_map: np.ndarray | None = None

    def __post_init__(self):
        if self.mode not in ("element-dimension", "design-element"):
            raise ValueError(f"unknown design mode {self.mode!r}")
        bounds = np.atleast_2d(np.asarray(self.bounds, dtype=float))
        object.__setattr__(self, "bounds", bounds)
        if np.any(bounds[:, 0] >= bounds[:, 1]):
            bad = int(np.argwhere(bounds[:, 0] >= bounds[:, 1])[0][0])
            raise ValueError(f"design variable {bad} has an empty box")
        if self.element_map is not None:
            object.__setattr__(self, "element_map", np.asarray(self.element_map, dtype=int))

    @property
    def n_variables(self) -> int:
        return self.bounds.shape[0]

    def basis_weights(self, mesh: Mesh) -> np.ndarray:
        """Interpolation weights w[k, e, q] with dimension(e, q) = sum_k w d_k."""
        n_d = self.n_variables
        w = np.zeros((n_d, mesh.n_elements, mesh.n_quad))
        if self.mode == "element-dimension":
            emap = self.element_map
            if emap is None:
                if n_d != mesh.n_elements:
                    raise ValueError("element_map required when n_d != n_elements")
                emap = np.arange(mesh.n_elements)
            for e in range(mesh.n_elements):
                w[emap[e], e, :] = 1.0
        else:
            # normalized arc coordinate of every quadrature point
            ends = np.concatenate([[0.0], np.cumsum(mesh.element_lengths)])
            total = ends[-1]
            # arc offset of each qp inside its element
            offsets = np.cumsum(mesh.weights, axis=1) - 0.5 * mesh.weights
            t = (ends[:-1, None] + offsets) / total
            vals, _ = bernstein_basis(n_d, 2.0 * t.ravel() - 1.0)
            w[:] = vals.T.reshape(n_d, mesh.n_elements, mesh.n_quad)
        return w


@dataclass
class SectionArrays:
    """Per-(element, quadrature point) stiffness and geometry arrays."""

    ea: np.ndarray
    ga: np.ndarray
    ei: np.ndarray
    area: np.ndarray
    # derivatives with respect to each design variable, (n_d, n_el, n_q)
    d_ea: np.ndarray | None = None
    d_ga: np.ndarray | None = None
    d_ei: np.ndarray | None = None
    d_area: np.ndarray | None = None

    @property
    def props(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.ea, self.ga, self.ei


def section_arrays(mesh: Mesh, design: DesignParam, values: np.ndarray) -> SectionArrays:
    """Stiffness arrays for a design value vector, with analytic sensitivities."""
    values = np.asarray(values, dtype=float)
    if values.shape != (design.n_variables,):
        raise ValueError(f"expected {design.n_variables} design values, got {values.shape}")
    w = design.basis_weights(mesh)
    dim = np.einsum("keq,k->eq", w, values)
    shape = (mesh.n_elements, mesh.n_quad)
    ea = np.empty(shape)
    ga = np.empty(shape)
    ei = np.empty(shape)
    area = np.empty(shape)
    d_ea = np.empty((design.n_variables, *shape))
    d_ga = np.empty_like(d_ea)
    d_ei = np.empty_like(d_ea)
    d_area = np.empty_like(d_ea)
    for e, sec in enumerate(mesh.sections):
        law = [sec.with_design_value(float(v)) for v in dim[e]]
        ea[e] = [s.young * s.geometry.area for s in law]
        ga[e] = [s.shear_correction * s.shear * s.geometry.area for s in law]
        ei[e] = [s.young * s.geometry.inertia for s in law]
        area[e] = [s.geometry.area for s in law]
        d_ea[:, e, :] = np.array([s.young * s.geometry.d_area for s in law]) * w[:, e, :]
        d_ga[:, e, :] = (
            np.array([s.shear_correction * s.shear * s.geometry.d_area for s in law]) * w[:, e, :]
        )
        d_ei[:, e, :] = np.array([s.young * s.geometry.d_inertia for s in law]) * w[:, e, :]
        d_area[:, e, :] = np.array([s.geometry.d_area for s in law]) * w[:, e, :]
    return SectionArrays(ea, ga, ei, area, d_ea, d_ga, d_ei, d_area)


def design_sensitivity_fint(
    mesh: Mesh, config: Configuration, design: DesignParam, values: np.ndarray
) -> np.ndarray:
    """Derivative of the assembled internal force w.r.t. the design values.

    Returns a dense ``(n_dofs, n_d)`` matrix; column k touches only the dofs
    of elements influenced by design variable k.
    """
    arrays = section_arrays(mesh, design, values)
    kin = mesh.element_kinematics(config)
    B = strain_operator(mesh, kin)
    d_sigma = np.stack(
        [
            arrays.d_ea * kin["eps"][None, ..., 0],
            arrays.d_ga * kin["eps"][None, ..., 1],
            arrays.d_ei * kin["kappa"][None, ...],
        ],
        axis=-1,
    )  # (n_d, n_el, n_q, 3)
    fe = np.einsum("eqij,keqi,eq->kej", B, d_sigma, mesh.weights)
    out = np.zeros((mesh.n_dofs, design.n_variables))
    for k in range(design.n_variables):
        np.add.at(out[:, k], mesh.dofmap.ravel(), fe[k].ravel())
    return out


# ---------------------------------------------------------------------------
# design cost models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DesignCostModel:
    """Objective for the design problems, with exact state/design gradients.

    kind
        ``shear-energy-max`` (negated shear energy, so lower is better),
        ``displacement-norm`` or ``volume``.
    A quadratic penalty on the deviation of the total mass from
    ``mass_limit`` is added when the limit is set.  The displacement norm
    is integrated nodally (trapezoidal over the element nodes, the same
    discrete form as the shape-matching cost) unless
    ``nodal_quadrature=False`` selects the mesh quadrature rule.
    """

    kind: str
    rho: float = 1.0
    mass_limit: float | None = None
    penalty_weight: float = 0.0
    nodal_quadrature: bool = True

    _KINDS = ("shear-energy-max", "displacement-norm", "volume")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown cost kind {self.kind!r}")

    def _mass(self, mesh: Mesh, arrays: SectionArrays) -> float:
        _, mass = volume_and_mass(mesh, arrays.area, self.rho)
        return mass

    def value(
        self, mesh: Mesh, config: Configuration, design: DesignParam, values, arrays=None
    ) -> float:
        arrays = arrays or section_arrays(mesh, design, values)
        if self.kind == "shear-energy-max":
            base = -shear_energy_cost(mesh, config, arrays.props)
        elif self.kind == "displacement-norm":
            if self.nodal_quadrature:
                base = shape_matching_cost(mesh, config, _undeformed(mesh))
            else:
                base = displacement_norm_cost(mesh, config)
        else:
            base = volume_and_mass(mesh, arrays.area, 1.0)[0]
        if self.mass_limit is not None:
            base += mass_penalty(self._mass(mesh, arrays), self.mass_limit, self.penalty_weight)
        return base

    def state_gradient(
        self, mesh: Mesh, config: Configuration, design: DesignParam, values, arrays=None
    ) -> np.ndarray:
        arrays = arrays or section_arrays(mesh, design, values)
        if self.kind == "shear-energy-max":
            return -shear_energy_state_gradient(mesh, config, arrays.props)
        if self.kind == "displacement-norm":
            if self.nodal_quadrature:
                return shape_matching_gradient(mesh, config, _undeformed(mesh))
            return displacement_norm_gradient(mesh, config)
        return np.zeros(mesh.n_dofs)

    def design_gradient(
        self, mesh: Mesh, config: Configuration, design: DesignParam, values, arrays=None
    ) -> np.ndarray:
        arrays = arrays or section_arrays(mesh, design, values)
        grad = np.zeros(design.n_variables)
        if self.kind == "shear-energy-max":
            partial = shear_energy_stiffness_partial(mesh, config)
            grad -= np.einsum("keq,eq->k", arrays.d_ga, partial)
        elif self.kind == "volume":
            grad += np.einsum("keq,eq->k", arrays.d_area, mesh.weights)
        if self.mass_limit is not None:
            slope = mass_penalty_slope(self._mass(mesh, arrays), self.mass_limit, self.penalty_weight)
            grad += slope * self.rho * np.einsum("keq,eq->k", arrays.d_area, mesh.weights)
        return grad


# ---------------------------------------------------------------------------
# axis-shape design: Bernstein curves and the volume gradient
# ---------------------------------------------------------------------------


def bernstein_basis(n_ctrl: int, xi) -> tuple[np.ndarray, np.ndarray]:
    """Bernstein basis of ``n_ctrl`` functions on [-1, 1] with derivatives.

    Returns arrays of shape ``(len(xi), n_ctrl)``; the values form a
    partition of unity.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    t = 0.5 * (xi + 1.0)
    deg = n_ctrl - 1
    vals = np.empty((xi.size, n_ctrl))
    derivs = np.empty_like(vals)
    for a in range(n_ctrl):
        binom = comb(deg, a)
        vals[:, a] = binom * t**a * (1.0 - t) ** (deg - a)
        # d/dxi = d/dt * 1/2
        da = np.zeros_like(t)
        if a > 0:
            da += a * t ** (a - 1) * (1.0 - t) ** (deg - a)
        if deg - a > 0:
            da -= (deg - a) * t**a * (1.0 - t) ** (deg - a - 1)
        derivs[:, a] = 0.5 * binom * da
    return vals, derivs


def shape_design_volume_gradient(
    control_points: np.ndarray, area: float, n_quad: int = 16
) -> tuple[float, np.ndarray]:
    """Volume of a Bernstein-parametrized axis and its control-point gradient.

    The axis curve is ``x(xi) = sum_a B_a(xi) d_a`` with 2D control points
    ``d_a``; the volume is ``integral of A * |x'(xi)| dxi`` and the gradient
    follows from the directional derivative of the curve metric.

    Raises
    ------
    ValueError
        If the curve tangent vanishes at a quadrature point.
    """
    from .shapes import gauss_rule

    pts = np.asarray(control_points, dtype=float)
    n_ctrl = pts.shape[0]
    xi, w = gauss_rule(n_quad)
    _, dB = bernstein_basis(n_ctrl, xi)
    tangents = dB @ pts  # (n_quad, 2)
    jac = np.linalg.norm(tangents, axis=1)
    if np.any(jac <= 1e-12):
        raise ValueError("axis curve tangent vanishes inside the parameter interval")
    volume = float(area * (jac * w).sum())
    unit = tangents / jac[:, None]
    grad = area * np.einsum("q,qa,qi->ai", w, dB, unit)
    return volume, grad
