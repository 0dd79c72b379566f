import numpy as np
import pytest

from beamopt.section import (
    CircularGeometry,
    RectangularGeometry,
    SectionLaw,
    Strains2D,
    stress_resultants,
)


def unit_square(k: float = 1.0) -> SectionLaw:
    return SectionLaw(12000.0, 6000.0, RectangularGeometry(1.0, 1.0), shear_correction=k)


class TestSectionProperties:
    def test_circular_d2(self):
        sec = SectionLaw(1.0, 1.0, CircularGeometry(2.0))
        A, I, J = sec.properties()
        assert A == pytest.approx(np.pi)
        assert I == pytest.approx(np.pi / 4.0)
        assert J == pytest.approx(np.pi / 2.0)

    def test_polar_is_twice_inertia_for_circles(self):
        for d in (0.5, 1.0, 2.0, 7.3):
            sec = SectionLaw(1.0, 1.0, CircularGeometry(d))
            _, I, J = sec.properties()
            assert J == 2.0 * I

    def test_unit_square(self):
        A, I, _ = unit_square().properties()
        assert A == 1.0
        assert I == pytest.approx(1.0 / 12.0)

    def test_rectangle_area(self):
        sec = SectionLaw(1.0, 1.0, RectangularGeometry(30.0, 40.0))
        assert sec.properties()[0] == pytest.approx(1200.0)

    def test_rejects_nonpositive_dimensions(self):
        with pytest.raises(ValueError):
            CircularGeometry(0.0)
        with pytest.raises(ValueError):
            RectangularGeometry(1.0, -2.0)
        with pytest.raises(ValueError):
            SectionLaw(-1.0, 1.0, CircularGeometry(1.0))


class TestStiffness:
    def test_unit_square_diagonal(self):
        ea, ga, ei = unit_square().stiffness()
        assert ea == pytest.approx(12000.0)
        assert ga == pytest.approx(6000.0)
        assert ei == pytest.approx(1000.0)

    def test_circular_area_slope(self):
        sec = SectionLaw(1.0, 1.0, CircularGeometry(2.0))
        assert sec.geometry.d_area == pytest.approx(np.pi)

    def test_sensitivities_match_central_differences(self):
        sections = [
            SectionLaw(75000.0, 50000.0, RectangularGeometry(30.0, 25.0), shear_correction=5 / 6),
            SectionLaw(210.0, 80.0, CircularGeometry(1.7)),
        ]
        for sec in sections:
            dim = (
                sec.geometry.height
                if isinstance(sec.geometry, RectangularGeometry)
                else sec.geometry.diameter
            )
            step = 1e-6 * dim
            _, grad = sec.stiffness_and_sensitivity()
            hi = np.array(sec.with_design_value(dim + step).stiffness())
            lo = np.array(sec.with_design_value(dim - step).stiffness())
            fd = (hi - lo) / (2.0 * step)
            np.testing.assert_allclose(grad, fd, rtol=1e-8)


class TestStressResultants:
    def test_zero_at_reference(self):
        strains = Strains2D(0.01, -0.2, 0.3, axial_ref=0.01, shear_ref=-0.2, curvature_ref=0.3)
        assert stress_resultants(strains, unit_square()) == (0.0, 0.0, 0.0)

    def test_axial_force_scaling(self):
        strains = Strains2D(0.01, 0.0, 0.0)
        n1, n2, m = stress_resultants(strains, unit_square())
        assert n1 == pytest.approx(120.0)
        assert n2 == 0.0 and m == 0.0

    def test_resultants_are_energy_gradient(self):
        sec = unit_square(k=5 / 6)
        ea, ga, ei = sec.stiffness()

        def energy(axial, shear, curvature):
            return 0.5 * (ea * axial**2 + ga * shear**2 + ei * curvature**2)

        point = (0.01, -0.003, 0.12)
        resultants = stress_resultants(Strains2D(*point), sec)
        h = 1e-7
        for i in range(3):
            hi = list(point)
            lo = list(point)
            hi[i] += h
            lo[i] -= h
            fd = (energy(*hi) - energy(*lo)) / (2.0 * h)
            assert resultants[i] == pytest.approx(fd, rel=1e-8)
