import numpy as np
import pytest

from beamopt.errors import DegenerateElementError
from beamopt.kinematics import material_strains_2d, virtual_strain_operator_3d
from beamopt.mesh import apply_rigid_motion, arc_mesh, reference_configuration
from beamopt.section import RectangularGeometry, SectionLaw
from beamopt.shapes import lagrange_shape
from beamopt.so3 import exp_so3


def two_node_point(xi=0.0):
    return lagrange_shape(2, xi)


class TestPlanarStrains:
    def test_straight_rest_state(self):
        N, dN = two_node_point()
        ref = np.array([[0.0, 0.0], [2.0, 0.0]])
        s = material_strains_2d(ref, np.zeros(2), ref, np.zeros(2), N, dN)
        assert s.axial == pytest.approx(s.axial_ref)
        assert s.shear == pytest.approx(s.shear_ref)
        assert s.curvature == pytest.approx(s.curvature_ref)
        assert abs(s.axial) < 1e-14 and abs(s.curvature) < 1e-14

    def test_rigid_rotation_is_strain_free(self):
        N, dN = two_node_point(0.3)
        ref = np.array([[1.0, -2.0], [3.5, -2.0]])
        ref_ang = np.zeros(2)
        angle = 0.8
        R = exp_so3([0, 0, angle])[:2, :2]
        cur = ref @ R.T + np.array([0.4, -1.1])
        s = material_strains_2d(cur, ref_ang + angle, ref, ref_ang, N, dN)
        assert s.axial - s.axial_ref == pytest.approx(0.0, abs=1e-13)
        assert s.shear - s.shear_ref == pytest.approx(0.0, abs=1e-13)
        assert s.curvature - s.curvature_ref == pytest.approx(0.0, abs=1e-13)

    def test_circular_arc_curvature(self):
        # bend a straight element into an arc of radius R with matching angles
        radius, length = 5.0, 0.8
        N, dN = two_node_point()
        ref = np.array([[0.0, 0.0], [length, 0.0]])
        dpsi = length / radius
        angles = np.array([0.0, dpsi])
        chord = 2.0 * radius * np.sin(dpsi / 2.0)
        mid = np.array([np.cos(dpsi / 2.0), np.sin(dpsi / 2.0)])
        cur = np.array([[0.0, 0.0], chord * mid])
        s = material_strains_2d(cur, angles, ref, np.zeros(2), N, dN)
        assert s.curvature - s.curvature_ref == pytest.approx(1.0 / radius, rel=2e-2)

    def test_degenerate_element_rejected(self):
        N, dN = two_node_point()
        ref = np.array([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(DegenerateElementError):
            material_strains_2d(ref, np.zeros(2), ref, np.zeros(2), N, dN)


def test_mesh_level_strain_objectivity():
    section = SectionLaw(12000.0, 6000.0, RectangularGeometry(1.0, 1.0))
    mesh = arc_mesh(radius=5.0, sweep=-np.pi, n_elements=4, section=section, start_angle=np.pi / 2)
    config = apply_rigid_motion(reference_configuration(mesh), translation=(3.0, -2.0), angle=0.7)
    kin = mesh.element_kinematics(config)
    assert np.abs(kin["eps"]).max() < 1e-12
    assert np.abs(kin["kappa"]).max() < 1e-12


class TestVirtualStrains3D:
    def test_null_variation(self):
        d_eps, d_omega = virtual_strain_operator_3d(
            np.eye(3), np.zeros(3), np.zeros(3), np.zeros(3), np.zeros(3), np.zeros(3)
        )
        np.testing.assert_allclose(d_eps, 0.0)
        np.testing.assert_allclose(d_omega, 0.0)

    def test_linearized_limit(self):
        dphi = np.array([0.1, -0.2, 0.3])
        d_eps, _ = virtual_strain_operator_3d(
            np.eye(3), np.zeros(3), np.zeros(3), dphi, np.array([0.4, 0.1, -0.2]), np.zeros(3)
        )
        np.testing.assert_allclose(d_eps, dphi, atol=1e-15)

    def test_matches_directional_finite_difference(self):
        rng = np.random.default_rng(2)
        h = 1e-7
        for _ in range(20):
            theta = rng.standard_normal(3)
            lam = exp_so3(theta)
            phi_prime = rng.standard_normal(3)
            dphi = rng.standard_normal(3)
            dtheta = rng.standard_normal(3)
            eps = lam.T @ phi_prime
            d_eps, _ = virtual_strain_operator_3d(lam, eps, np.zeros(3), dphi, dtheta, np.zeros(3))
            lam_pert = lam @ exp_so3(h * dtheta)
            eps_pert = lam_pert.T @ (phi_prime + h * dphi)
            fd = (eps_pert - eps) / h
            np.testing.assert_allclose(d_eps, fd, atol=40.0 * h)
