import numpy as np
import pytest

from beamopt.assembly import (
    assemble_system,
    element_potential,
    element_residual,
    element_tangent,
    internal_force,
    residual,
    strain_energy,
    tangent_matrix,
)
from beamopt.loads import FollowerForce, LoadCase, LoadPattern, PointForce, PointMoment
from beamopt.mesh import (
    Configuration,
    apply_rigid_motion,
    arc_mesh,
    reference_configuration,
    straight_mesh,
)
from beamopt.section import RectangularGeometry, SectionLaw

SECTION = SectionLaw(12000.0, 6000.0, RectangularGeometry(1.0, 1.0))


def perturbed(mesh, seed=0, scale=0.05):
    rng = np.random.default_rng(seed)
    config = reference_configuration(mesh)
    config.positions += scale * rng.standard_normal(config.positions.shape)
    config.angles += scale * rng.standard_normal(config.angles.shape)
    return config


def test_stress_free_reference_residual():
    for mesh in (
        straight_mesh(10.0, 5, SECTION),
        arc_mesh(radius=5.0, sweep=-np.pi, n_elements=4, section=SECTION, start_angle=np.pi / 2),
    ):
        f = internal_force(mesh, reference_configuration(mesh))
        assert np.abs(f).max() < 1e-12


def test_single_element_axial_stretch():
    mesh = straight_mesh(2.0, 1, SECTION)
    config = reference_configuration(mesh)
    stretch = 0.01
    config.positions[1, 0] += stretch * 2.0
    fe = element_residual(mesh, config, 0)
    # hand quadrature: eps = stretch, axial force EA*eps along the element
    ea = SECTION.stiffness()[0]
    assert fe[3] == pytest.approx(ea * stretch, rel=1e-12)
    assert fe[0] == pytest.approx(-ea * stretch, rel=1e-12)


def test_element_residual_is_energy_gradient():
    mesh = straight_mesh(3.0, 3, SECTION)
    case = LoadCase(base=LoadPattern(forces=(PointForce(1, (0.4, -1.0)),), moments=(PointMoment(1, 0.7),)))
    config = perturbed(mesh, seed=3)
    h = 1e-6
    for element in range(mesh.n_elements):
        fe = element_residual(mesh, config, element, loadcase=case)
        dofs = mesh.dofmap[element]
        fd = np.zeros(len(dofs))
        for j, dof in enumerate(dofs):
            for sign in (1.0, -1.0):
                vec = config.dof_vector()
                vec[dof] += sign * h
                fd[j] += sign * element_potential(
                    mesh, Configuration.from_dof_vector(vec), element, loadcase=case
                )
        fd /= 2.0 * h
        np.testing.assert_allclose(fe, fd, rtol=1e-6, atol=1e-6)


def test_element_tangent_matches_residual_differences():
    rng = np.random.default_rng(1)
    mesh = straight_mesh(4.0, 2, SECTION)
    h = 1e-7
    for trial in range(20):
        config = perturbed(mesh, seed=trial, scale=0.1)
        element = int(rng.integers(mesh.n_elements))
        Ke = element_tangent(mesh, config, element)
        dofs = mesh.dofmap[element]
        fd = np.zeros_like(Ke)
        for j, dof in enumerate(dofs):
            for sign in (1.0, -1.0):
                vec = config.dof_vector()
                vec[dof] += sign * h
                fd[:, j] += sign * element_residual(mesh, Configuration.from_dof_vector(vec), element)
        fd /= 2.0 * h
        scale = np.abs(fd).max()
        assert np.abs(Ke - fd).max() / scale < 1e-5


def test_dead_load_tangent_symmetric():
    mesh = straight_mesh(5.0, 4, SECTION)
    case = LoadCase(base=LoadPattern(forces=(PointForce(4, (1.0, 2.0)),)))
    config = perturbed(mesh, seed=5)
    K = tangent_matrix(mesh, config, loadcase=case)
    assert np.abs(K - K.T).max() < 1e-10


def test_follower_breaks_symmetry_only_in_its_rotation_column():
    mesh = straight_mesh(5.0, 4, SECTION)
    node = 3
    case = LoadCase(base=LoadPattern(followers=(FollowerForce(node, (0.0, 2.0)),)))
    config = perturbed(mesh, seed=6)
    K = tangent_matrix(mesh, config, loadcase=case)
    skew = K - K.T
    col = 3 * node + 2
    mask = np.zeros_like(skew, dtype=bool)
    mask[:, col] = True
    mask[col, :] = True
    assert np.abs(skew[~mask]).max() < 1e-10
    assert np.abs(skew).max() > 1e-3


def test_assembled_residual_is_potential_gradient():
    mesh = straight_mesh(4.0, 4, SECTION)
    case = LoadCase(base=LoadPattern(forces=(PointForce(4, (0.5, -0.8)),), moments=(PointMoment(2, 1.2),)))
    config = perturbed(mesh, seed=9)
    r = residual(mesh, config, case)
    h = 1e-6

    def potential(c):
        f_ext = np.zeros(mesh.n_dofs)
        f_ext[12:14] = (0.5, -0.8)
        f_ext[8] = 1.2
        return strain_energy(mesh, c) - float(f_ext @ c.dof_vector())

    for dof in range(mesh.n_dofs):
        hi = config.dof_vector()
        lo = config.dof_vector()
        hi[dof] += h
        lo[dof] -= h
        fd = (
            potential(Configuration.from_dof_vector(hi))
            - potential(Configuration.from_dof_vector(lo))
        ) / (2 * h)
        assert r[dof] == pytest.approx(fd, rel=1e-6, abs=2e-5)


def test_assemble_system_consistent_with_separate_calls():
    mesh = arc_mesh(radius=5.0, sweep=-np.pi, n_elements=4, section=SECTION, start_angle=np.pi / 2)
    case = LoadCase(base=LoadPattern(followers=(FollowerForce(4, (0.3, 1.0)),)))
    config = perturbed(mesh, seed=12)
    r, K = assemble_system(mesh, config, case, load_scale=0.7)
    np.testing.assert_allclose(r, residual(mesh, config, case, load_scale=0.7), atol=1e-12)
    np.testing.assert_allclose(K, tangent_matrix(mesh, config, loadcase=case, load_scale=0.7), atol=1e-12)


def test_rigid_motion_produces_no_internal_force():
    mesh = arc_mesh(radius=5.0, sweep=-np.pi, n_elements=4, section=SECTION, start_angle=np.pi / 2)
    config = apply_rigid_motion(reference_configuration(mesh), translation=(2.0, 0.5), angle=-1.1)
    assert np.abs(internal_force(mesh, config)).max() < 1e-10
