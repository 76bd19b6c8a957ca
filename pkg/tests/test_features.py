import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rtraj.errors import DegenerateBone, DegenerateShape, SingularCovariance, ValidationError
from rtraj.features import (SKELETON_15, SKELETON_20, SkeletonSequence, covariance_descriptor,
                            covariance_trajectory, larp_from_skeleton, orthonormal_basis,
                            shape_to_grassmann, shape_trajectory)
from rtraj.geometry import SE3Product, SPD, Grassmann
from rtraj.geometry.se3 import so3_exp


def random_skeleton(J, bones, T, rng):
    # each bone hangs off its parent with a random direction of length ~0.3
    pos = np.zeros((T, J, 3))
    base = rng.standard_normal((J, 3))
    for a, b in bones:
        pos[:, b] = pos[:, a] + 0.3 * base[b] + 0.05 * rng.standard_normal((T, 3))
    return pos + rng.standard_normal(3)


@pytest.mark.parametrize("J,bones,expected", [(15, SKELETON_15, 182), (20, SKELETON_20, 342)])
def test_component_counts(J, bones, expected, rng):
    seq = SkeletonSequence(random_skeleton(J, bones, 35, rng), bones)
    traj = larp_from_skeleton(seq)
    assert seq.n_components == expected
    assert traj.manifold == SE3Product(expected)
    assert traj.samples.shape == (35, expected, 4, 4)
    assert max(traj.manifold.validate(traj.samples).values()) <= 1e-9
    if J == 15:
        assert traj.T * traj.manifold.coord_dim == 38220


def test_rigid_translation_leaves_features_unchanged(rng):
    pos = random_skeleton(15, SKELETON_15, 10, rng)
    a = larp_from_skeleton(SkeletonSequence(pos, SKELETON_15))
    b = larp_from_skeleton(SkeletonSequence(pos + np.array([3.0, -1.0, 7.5]), SKELETON_15))
    assert np.max(a.manifold.dist(a.samples, b.samples)) <= 1e-10


def test_rotation_about_up_axis_leaves_features_unchanged(rng):
    # frames use the global up vector, so yaw rotations cancel in relative poses
    pos = random_skeleton(15, SKELETON_15, 5, rng)
    R = so3_exp(np.array([0.0, 0.0, 0.8]))
    a = larp_from_skeleton(SkeletonSequence(pos, SKELETON_15))
    b = larp_from_skeleton(SkeletonSequence(pos @ R.T, SKELETON_15))
    assert np.max(a.manifold.dist(a.samples, b.samples)) <= 1e-9


def test_relative_pose_by_hand():
    # joint 0 at origin, bone 0 along x (length 2), bone 1 from joint 1 along z (length 1)
    pos = np.array([[[0.0, 0, 0], [2.0, 0, 0], [2.0, 0, 1.0]]] * 2)
    traj = larp_from_skeleton(SkeletonSequence(pos, [(0, 1), (1, 2)]))
    g = traj.samples[0, 0]  # bone 1 in the frame of bone 0
    # bone 0 frame: x=(1,0,0), y=(0,0,1), z=(0,-1,0); bone 1 is vertical so
    # its y falls back to (0,1,0): x=(0,0,1), y=(0,1,0), z=(-1,0,0)
    F0 = np.array([[1, 0, 0], [0, 0, -1], [0, 1, 0.0]])
    F1 = np.array([[0, 0, -1], [0, 1, 0], [1, 0, 0.0]])
    assert np.allclose(g[:3, :3], F0.T @ F1)
    assert np.allclose(g[:3, 3], F0.T @ np.array([2.0, 0, 0]) / 2.0)


def test_skeleton_validation(rng):
    pos = random_skeleton(15, SKELETON_15, 3, rng)
    with pytest.raises(ValidationError):
        SkeletonSequence(pos, SKELETON_15[:-1])
    cyclic = SKELETON_15[:-1] + [(0, 2)]
    with pytest.raises(ValidationError):
        SkeletonSequence(pos, cyclic)
    bad = pos.copy()
    bad[1, 4, 2] = np.nan
    with pytest.raises(ValidationError):
        SkeletonSequence(bad, SKELETON_15)
    flat = pos.copy()
    flat[:, 4] = flat[:, 3]
    with pytest.raises(DegenerateBone):
        larp_from_skeleton(SkeletonSequence(flat, SKELETON_15))


def test_covariance_of_gaussian_rows(rng):
    P = covariance_descriptor(rng.standard_normal((10_000, 7)))
    assert np.linalg.norm(P - np.eye(7)) <= 0.1
    assert max(SPD(7).validate(P).values()) <= 1e-9


def test_covariance_duplicate_rows(rng):
    Z = rng.standard_normal((50, 7)) @ rng.standard_normal((7, 7))
    assert np.allclose(covariance_descriptor(Z), covariance_descriptor(np.vstack([Z, Z])), atol=1e-12)


def test_covariance_errors(rng):
    with pytest.raises(SingularCovariance):
        covariance_descriptor(np.ones((20, 7)))
    Z = rng.standard_normal((20, 7))
    Z[:, 3] = Z[:, 1]
    P = covariance_descriptor(Z)  # exactly rank-deficient: rescued by the ridge
    assert max(SPD(7).validate(P).values()) <= 1e-6
    with pytest.raises(ValidationError):
        covariance_descriptor(rng.standard_normal((5, 7)))


def test_covariance_trajectory(rng):
    traj = covariance_trajectory([rng.standard_normal((30, 7)) for _ in range(4)])
    assert traj.manifold == SPD(7) and traj.T == 4


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(4, 30))
def test_shape_affine_invariance(seed, m):
    rng = np.random.default_rng(seed)
    L = rng.standard_normal((m, 2))
    A = rng.standard_normal((2, 2)) + 3 * np.eye(2)
    P = shape_to_grassmann(L)
    assert np.allclose(P, shape_to_grassmann(L @ A), atol=1e-10)
    assert np.isclose(np.trace(P), 2.0)
    assert max(Grassmann(2, m).validate(P).values()) <= 1e-10


def test_axis_aligned_shape_is_standard_subspace():
    L = np.zeros((6, 2))
    L[0, 0] = 2.0
    L[1, 1] = -1.5
    assert np.array_equal(shape_to_grassmann(L, center=False), Grassmann(2, 6).identity())


def test_reprojection_is_stable(rng):
    P = shape_to_grassmann(rng.standard_normal((12, 2)))
    Y = orthonormal_basis(np.linalg.eigh(P)[1][:, -2:])
    P2 = shape_to_grassmann(Y, center=False)
    assert np.abs(P2 - P).max() <= 1e-15
    assert np.array_equal(shape_to_grassmann(Y, center=False), P2)


def test_shape_errors(rng):
    L = np.outer(np.arange(8.0), [1.0, 2.0])
    with pytest.raises(DegenerateShape):
        shape_to_grassmann(L)
    with pytest.raises(ValidationError):
        shape_to_grassmann(rng.standard_normal((2, 2)))


def test_shape_trajectory(rng):
    traj = shape_trajectory([rng.standard_normal((10, 2)) for _ in range(3)])
    assert traj.manifold == Grassmann(2, 10) and traj.T == 3
