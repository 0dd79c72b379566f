import numpy as np
import pytest

from beamopt.costs import (
    displacement_norm_cost,
    displacement_norm_gradient,
    mass_penalty,
    regularized_control_cost,
    shape_matching_cost,
    shape_matching_gradient,
    shear_energy_cost,
    shear_energy_state_gradient,
    volume_and_mass,
)
from beamopt.loads import LoadCase, LoadPattern, PointMoment
from beamopt.mesh import Configuration, reference_configuration, straight_mesh
from beamopt.section import RectangularGeometry, SectionLaw
from beamopt.solver import NewtonOptions, newton_solve

SECTION = SectionLaw(12000.0, 6000.0, RectangularGeometry(1.0, 1.0))


def perturbed(mesh, seed=0, scale=0.05):
    rng = np.random.default_rng(seed)
    config = reference_configuration(mesh)
    config.positions += scale * rng.standard_normal(config.positions.shape)
    config.angles += scale * rng.standard_normal(config.angles.shape)
    return config


class TestShapeMatching:
    def test_zero_at_match(self):
        mesh = straight_mesh(4.0, 4, SECTION)
        config = perturbed(mesh)
        assert shape_matching_cost(mesh, config, config.copy()) == 0.0

    def test_single_offset_node(self):
        mesh = straight_mesh(2.0, 1, SECTION)
        desired = reference_configuration(mesh)
        config = reference_configuration(mesh)
        config.positions[1, 0] += 0.1
        # one element of length 2, one offset node counted once
        assert shape_matching_cost(mesh, config, desired) == pytest.approx(0.25 * 2.0 * 0.01)

    def test_rotations_carry_no_cost(self):
        mesh = straight_mesh(4.0, 4, SECTION)
        desired = reference_configuration(mesh)
        config = reference_configuration(mesh)
        config.angles += 0.5
        assert shape_matching_cost(mesh, config, desired) == 0.0

    def test_gradient_matches_finite_differences(self):
        mesh = straight_mesh(4.0, 3, SECTION)
        desired = perturbed(mesh, seed=1)
        config = perturbed(mesh, seed=2)
        g = shape_matching_gradient(mesh, config, desired)
        h = 1e-7
        for dof in range(mesh.n_dofs):
            hi = config.dof_vector()
            lo = config.dof_vector()
            hi[dof] += h
            lo[dof] -= h
            fd = (
                shape_matching_cost(mesh, Configuration.from_dof_vector(hi), desired)
                - shape_matching_cost(mesh, Configuration.from_dof_vector(lo), desired)
            ) / (2 * h)
            assert g[dof] == pytest.approx(fd, abs=1e-8)

    def test_mesh_mismatch_rejected(self):
        mesh = straight_mesh(4.0, 4, SECTION)
        other = reference_configuration(straight_mesh(4.0, 2, SECTION))
        with pytest.raises(ValueError):
            shape_matching_cost(mesh, reference_configuration(mesh), other)


class TestRegularizedControlCost:
    def test_alpha_zero_reduces_to_shape_cost(self):
        mesh = straight_mesh(4.0, 4, SECTION)
        desired = perturbed(mesh, seed=3)
        config = perturbed(mesh, seed=4)
        nu = np.array([3.0, -1.0])
        assert regularized_control_cost(mesh, config, desired, nu, 0.0) == shape_matching_cost(
            mesh, config, desired
        )

    def test_couple_counted_per_force(self):
        mesh = straight_mesh(4.0, 4, SECTION)
        config = reference_configuration(mesh)
        nu = np.array([68.466, 68.466, 68.526])
        alpha = 1e-9
        value = regularized_control_cost(mesh, config, config.copy(), nu, alpha)
        assert value == pytest.approx(alpha * (2 * 68.466**2 + 68.526**2), rel=1e-12)

    def test_monotone_in_alpha(self):
        mesh = straight_mesh(4.0, 4, SECTION)
        desired = perturbed(mesh, seed=5)
        config = perturbed(mesh, seed=6)
        nu = np.array([2.0, 1.0])
        values = [regularized_control_cost(mesh, config, desired, nu, a) for a in (0.0, 1e-6, 1e-3, 1.0)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_negative_alpha_rejected(self):
        mesh = straight_mesh(4.0, 4, SECTION)
        config = reference_configuration(mesh)
        with pytest.raises(ValueError):
            regularized_control_cost(mesh, config, config.copy(), np.array([1.0]), -1e-3)


class TestVolumeAndMass:
    def test_thickness_mass_identity(self):
        sec = SectionLaw(75000.0, 50000.0, RectangularGeometry(30.0, 30.0))
        mesh = straight_mesh(1000.0, 4, sec)
        volume, mass = volume_and_mass(mesh, rho=1.0 / 30.0)
        assert mass == pytest.approx(250.0 * 4 * 30.0)
        assert volume == pytest.approx(30.0 * mass)

    def test_reported_optimal_mass(self):
        sec = SectionLaw(75000.0, 50000.0, RectangularGeometry(30.0, 30.0))
        mesh = straight_mesh(1000.0, 4, sec)
        areas = np.array([[30.0 * h] for h in (43.79, 35.93, 26.33, 14.20)])
        _, mass = volume_and_mass(mesh, areas, rho=1.0 / 30.0)
        assert mass == pytest.approx(30062.5, abs=1.0)

    def test_mass_linear_in_thickness(self):
        sec = SectionLaw(75000.0, 50000.0, RectangularGeometry(30.0, 30.0))
        mesh = straight_mesh(1000.0, 4, sec)
        areas = mesh.section_areas()
        _, m1 = volume_and_mass(mesh, areas, rho=1.0 / 30.0)
        _, m2 = volume_and_mass(mesh, 2.0 * areas, rho=1.0 / 30.0)
        assert m2 == pytest.approx(2.0 * m1)


class TestFieldCosts:
    def test_undeformed_costs_vanish(self):
        mesh = straight_mesh(4.0, 4, SECTION)
        config = reference_configuration(mesh)
        assert shear_energy_cost(mesh, config) == 0.0
        assert displacement_norm_cost(mesh, config) == 0.0

    def test_pure_bending_is_shear_free(self):
        mesh = straight_mesh(10.0, 10, SECTION)
        ei = SECTION.stiffness()[2]
        case = LoadCase(base=LoadPattern(moments=(PointMoment(mesh.n_nodes - 1, 2 * np.pi * ei / 10),)))
        result = newton_solve(mesh, case, options=NewtonOptions(load_steps=12))
        assert shear_energy_cost(mesh, result.config) < 1e-16

    def test_rigid_translation_displacement_norm(self):
        sec = SectionLaw(75000.0, 50000.0, RectangularGeometry(30.0, 30.0))
        mesh = straight_mesh(1000.0, 4, sec)
        config = reference_configuration(mesh)
        config.positions[:, 1] += 1.0
        assert displacement_norm_cost(mesh, config) == pytest.approx(0.5 * 1000.0)

    def test_field_gradients_match_finite_differences(self):
        mesh = straight_mesh(4.0, 3, SECTION)
        config = perturbed(mesh, seed=7, scale=0.08)
        h = 1e-6
        for value, gradient in (
            (shear_energy_cost, shear_energy_state_gradient),
            (displacement_norm_cost, displacement_norm_gradient),
        ):
            g = gradient(mesh, config)
            for dof in range(mesh.n_dofs):
                hi = config.dof_vector()
                lo = config.dof_vector()
                hi[dof] += h
                lo[dof] -= h
                fd = (
                    value(mesh, Configuration.from_dof_vector(hi))
                    - value(mesh, Configuration.from_dof_vector(lo))
                ) / (2 * h)
                assert g[dof] == pytest.approx(fd, rel=2e-5, abs=2e-6)


def test_mass_penalty_is_two_sided():
    assert mass_penalty(30000.0, 30000.0, 0.5) == 0.0
    assert mass_penalty(30100.0, 30000.0, 0.5) == pytest.approx(5000.0)
    assert mass_penalty(29900.0, 30000.0, 0.5) == pytest.approx(5000.0)
