import numpy as np
import pytest

from beamopt.loads import (
    FollowerForce,
    LoadCase,
    LoadPattern,
    PointForce,
    PointMoment,
    control_matrix,
    external_force,
    external_tangent,
    follower_load_work,
)
from beamopt.mesh import reference_configuration, straight_mesh
from beamopt.section import RectangularGeometry, SectionLaw

SECTION = SectionLaw(12000.0, 6000.0, RectangularGeometry(1.0, 1.0))


class TestFollowerLoadWork:
    def test_unrotated(self):
        force, _ = follower_load_work(0.0, (1.0, 0.5))
        np.testing.assert_allclose(force, [1.0, 0.5])

    def test_quarter_turn(self):
        force, _ = follower_load_work(np.pi / 2, (1.0, 0.0))
        np.testing.assert_allclose(force, [0.0, 1.0], atol=1e-15)

    def test_tangent_block_matches_finite_difference(self):
        rng = np.random.default_rng(0)
        h = 1e-7
        for _ in range(25):
            angle = rng.uniform(-np.pi, np.pi)
            p0 = rng.standard_normal(2)
            _, dforce = follower_load_work(angle, p0)
            fd = (follower_load_work(angle + h, p0)[0] - follower_load_work(angle - h, p0)[0]) / (2 * h)
            np.testing.assert_allclose(dforce, fd, rtol=1e-7, atol=1e-9)


def test_external_force_assembly():
    mesh = straight_mesh(2.0, 2, SECTION)
    config = reference_configuration(mesh)
    case = LoadCase(
        base=LoadPattern(
            forces=(PointForce(2, (3.0, -1.0)),),
            moments=(PointMoment(1, 2.5),),
        )
    )
    f = external_force(mesh, case, config)
    assert f[6] == 3.0 and f[7] == -1.0 and f[5] == 2.5
    assert np.count_nonzero(f) == 3


def test_control_columns_scale_linearly():
    mesh = straight_mesh(2.0, 2, SECTION)
    config = reference_configuration(mesh)
    case = LoadCase(
        control=(
            LoadPattern(forces=(PointForce(2, (0.0, 1.0)),)),
            LoadPattern(moments=(PointMoment(2, 1.0),)),
        )
    )
    nu = np.array([4.0, -2.0])
    f = external_force(mesh, case, config, nu)
    F0 = control_matrix(mesh, case, config)
    np.testing.assert_allclose(f, F0 @ nu)
    assert F0.shape == (mesh.n_dofs, 2)


def test_missing_control_vector_rejected():
    mesh = straight_mesh(2.0, 2, SECTION)
    case = LoadCase(control=(LoadPattern(moments=(PointMoment(2, 1.0),)),))
    with pytest.raises(ValueError):
        external_force(mesh, case, reference_configuration(mesh))


def test_load_on_unknown_node_rejected():
    mesh = straight_mesh(2.0, 2, SECTION)
    case = LoadCase(base=LoadPattern(forces=(PointForce(9, (1.0, 0.0)),)))
    with pytest.raises(ValueError):
        case.validate(mesh)


def test_follower_rotates_with_configuration():
    mesh = straight_mesh(2.0, 2, SECTION)
    config = reference_configuration(mesh)
    config.angles[2] = np.pi / 2
    case = LoadCase(base=LoadPattern(followers=(FollowerForce(2, (1.0, 0.0)),)))
    f = external_force(mesh, case, config)
    np.testing.assert_allclose(f[6:8], [0.0, 1.0], atol=1e-15)
    K = external_tangent(mesh, case, config)
    # only the rotation column of the loaded node is populated
    mask = np.zeros_like(K, dtype=bool)
    mask[6:8, 8] = True
    assert np.all(K[~mask] == 0.0)
    np.testing.assert_allclose(K[6:8, 8], [-1.0, 0.0], atol=1e-15)
