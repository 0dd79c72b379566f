"""Cross-section geometry, elastic constants and their design derivatives.

A :class:`SectionLaw` bundles the material moduli with one parametrized
cross-section shape.  The planar solver consumes the diagonal stiffness
triple (EA, kGA, EI); optimal-design code additionally needs the
analytic derivatives of those entries with respect to the active design
dimension (diameter for circular sections, height for rectangular ones).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "CircularGeometry",
    "RectangularGeometry",
    "SectionLaw",
    "Strains2D",
    "stress_resultants",
]


@dataclass(frozen=True)
class CircularGeometry:
    """Solid circular section of diameter ``d``; polar moment J = 2 I."""

    diameter: float

    design_dimension = "diameter"

    def __post_init__(self):
        if self.diameter <= 0.0:
            raise ValueError(f"diameter must be positive, got {self.diameter}")

    @property
    def area(self) -> float:
        return self.diameter**2 * np.pi / 4.0

    @property
    def inertia(self) -> float:
        return self.diameter**4 * np.pi / 64.0

    @property
    def polar(self) -> float:
        return self.diameter**4 * np.pi / 32.0

    # derivatives with respect to the diameter
    @property
    def d_area(self) -> float:
        return self.diameter * np.pi / 2.0

    @property
    def d_inertia(self) -> float:
        return self.diameter**3 * np.pi / 16.0

    def with_value(self, diameter: float) -> "CircularGeometry":
        return CircularGeometry(diameter)


@dataclass(frozen=True)
class RectangularGeometry:
    """Rectangle of width ``b`` and in-plane height ``h``; ``h`` is the design dimension.

    The polar value returned here is the polar second moment of area; it is
    never used by the planar solver and is not a torsion constant.
    """

    width: float
    height: float

    design_dimension = "height"

    def __post_init__(self):
        if self.width <= 0.0 or self.height <= 0.0:
            raise ValueError(
                f"dimensions must be positive, got b={self.width}, h={self.height}"
            )

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def inertia(self) -> float:
        return self.width * self.height**3 / 12.0

    @property
    def polar(self) -> float:
        return self.area * (self.width**2 + self.height**2) / 12.0

    # derivatives with respect to the height
    @property
    def d_area(self) -> float:
        return self.width

    @property
    def d_inertia(self) -> float:
        return self.width * self.height**2 / 4.0

    def with_value(self, height: float) -> "RectangularGeometry":
        return RectangularGeometry(self.width, height)


@dataclass(frozen=True)
class SectionLaw:
    """Material + section bundle producing the planar stiffness diagonals.

    Parameters
    ----------
    young, shear : float
        Elastic moduli E and G.
    geometry : CircularGeometry or RectangularGeometry
    shear_correction : float
        Dimensionless factor k multiplying GA (default 1).
    """

    young: float
    shear: float
    geometry: CircularGeometry | RectangularGeometry
    shear_correction: float = 1.0

    def __post_init__(self):
        if self.young <= 0.0 or self.shear <= 0.0:
            raise ValueError("moduli must be positive")
        if self.shear_correction <= 0.0:
            raise ValueError("shear correction factor must be positive")

    def properties(self) -> tuple[float, float, float]:
        """Section area, moment of inertia and polar moment (A, I, J)."""
        g = self.geometry
        return g.area, g.inertia, g.polar

    def stiffness(self) -> tuple[float, float, float]:
        """Planar stiffness diagonal (EA, kGA, EI)."""
        g = self.geometry
        return (
            self.young * g.area,
            self.shear_correction * self.shear * g.area,
            self.young * g.inertia,
        )

    def stiffness_and_sensitivity(
        self,
    ) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
        """Stiffness diagonal plus its derivative w.r.t. the design dimension.

        The active dimension is the diameter for circular geometry and the
        height for rectangular geometry.
        """
        g = self.geometry
        stiff = self.stiffness()
        grad = (
            self.young * g.d_area,
            self.shear_correction * self.shear * g.d_area,
            self.young * g.d_inertia,
        )
        return stiff, grad

    def with_design_value(self, value: float) -> "SectionLaw":
        """Copy of the law with the active design dimension replaced."""
        return replace(self, geometry=self.geometry.with_value(value))


@dataclass(frozen=True)
class Strains2D:
    """Planar strain state at a point: axial, shear, curvature + reference values.

    The reference entries are the same measures evaluated on the initial
    geometry, so a freshly built configuration is stress free.
    """

    axial: float
    shear: float
    curvature: float
    axial_ref: float = 0.0
    shear_ref: float = 0.0
    curvature_ref: float = 0.0


def stress_resultants(strains: Strains2D, section: SectionLaw) -> tuple[float, float, float]:
    """Planar stress resultants (axial force, shear force, bending moment).

    Linear elastic law ``n = C (eps - eps0)``, ``m = EI (kappa - kappa0)``.
    """
    ea, ga, ei = section.stiffness()
    return (
        ea * (strains.axial - strains.axial_ref),
        ga * (strains.shear - strains.shear_ref),
        ei * (strains.curvature - strains.curvature_ref),
    )
