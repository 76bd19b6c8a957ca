"""Raw observations to manifold-valued trajectories.

* skeletons -> relative rigid transforms between every ordered pair of bones
  (a point of SE(3)^(B(B-1)) per frame),
* per-frame feature matrices -> unit-determinant covariance descriptors,
* landmark shapes -> 2-D column spans on the Grassmannian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elastic import Trajectory
from .errors import DegenerateBone, DegenerateShape, SingularCovariance, ValidationError
from .geometry import SE3Product, SPD, Grassmann
from .geometry.se3 import se3_inv

# Joint trees of common depth-camera skeletons, as (parent, child) pairs.
# 15 joints: head, neck, torso, l/r shoulder, elbow, hand, l/r hip, knee, foot.
SKELETON_15 = [(1, 0), (1, 2), (1, 3), (3, 4), (4, 5), (1, 6), (6, 7), (7, 8),
               (2, 9), (9, 10), (10, 11), (2, 12), (12, 13), (13, 14)]
# 20 joints: hip centre, spine, shoulder centre, head, then arms and legs.
SKELETON_20 = [(0, 1), (1, 2), (2, 3), (2, 4), (4, 5), (5, 6), (6, 7), (2, 8), (8, 9),
               (9, 10), (10, 11), (0, 12), (12, 13), (13, 14), (14, 15), (0, 16), (16, 17),
               (17, 18), (18, 19)]

UP = np.array([0.0, 0.0, 1.0])
UP_FALLBACK = np.array([0.0, 1.0, 0.0])
PARALLEL_TOL = 1e-6
MIN_BONE = 1e-9


def default_bones(n_joints: int):
    if n_joints == 15:
        return list(SKELETON_15)
    if n_joints == 20:
        return list(SKELETON_20)
    return [(j, j + 1) for j in range(n_joints - 1)]


@dataclass
class SkeletonSequence:
    joints: np.ndarray  # (T, J, 3)
    bones: list

    def __post_init__(self):
        self.joints = np.asarray(self.joints, float)
        if self.joints.ndim != 3 or self.joints.shape[2] != 3:
            raise ValidationError("joints must have shape (T, J, 3)")
        T, J, _ = self.joints.shape
        if J < 2 or T < 1:
            raise ValidationError("need at least two joints and one frame")
        bad = np.argwhere(~np.isfinite(self.joints))
        if len(bad):
            raise ValidationError("joint coordinates contain NaN or inf",
                                  indices=[tuple(int(i) for i in b) for b in bad[:10]])
        self.bones = [(int(a), int(b)) for a, b in self.bones]
        check_tree(self.bones, J)

    @property
    def T(self) -> int:
        return self.joints.shape[0]

    @property
    def n_joints(self) -> int:
        return self.joints.shape[1]

    @property
    def n_components(self) -> int:
        B = len(self.bones)
        return B * (B - 1)


def check_tree(bones, n_joints):
    """Bones must form a spanning tree over the joints."""
    if len(bones) != n_joints - 1:
        raise ValidationError(f"a skeleton tree over {n_joints} joints needs {n_joints - 1} bones")
    parent = list(range(n_joints))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in bones:
        if not (0 <= a < n_joints and 0 <= b < n_joints) or a == b:
            raise ValidationError(f"bad bone ({a}, {b})")
        ra, rb = find(a), find(b)
        if ra == rb:
            raise ValidationError(f"bone ({a}, {b}) closes a cycle")
        parent[ra] = rb


def bone_frames(joints, bones):
    """Canonical frame of every bone: (T, B, 4, 4) transforms and (T, B) lengths.

    x runs along the bone, y is the global up vector made orthogonal to x
    (another axis when the bone is vertical), z = x cross y; the origin is
    the bone's first joint.
    """
    joints = np.asarray(joints, float)
    a = np.array([b[0] for b in bones])
    b = np.array([b[1] for b in bones])
    vec = joints[:, b] - joints[:, a]
    length = np.linalg.norm(vec, axis=-1)
    short = np.argwhere(length < MIN_BONE)
    if len(short):
        raise DegenerateBone("zero-length bone", indices=[(int(t), bones[int(k)]) for t, k in short[:10]])
    x = vec / length[..., None]
    up = np.where((np.abs(x @ UP) > 1 - PARALLEL_TOL)[..., None], UP_FALLBACK, UP)
    y = up - np.sum(up * x, axis=-1, keepdims=True) * x
    y /= np.linalg.norm(y, axis=-1, keepdims=True)
    z = np.cross(x, y)
    F = np.zeros(vec.shape[:-1] + (4, 4))
    F[..., :3, 0], F[..., :3, 1], F[..., :3, 2] = x, y, z
    F[..., :3, 3] = joints[:, a]
    F[..., 3, 3] = 1.0
    return F, length


def pair_indices(n_bones: int):
    """Ordered pairs (b1, b2), b1 != b2, in row-major order."""
    first, second = np.meshgrid(np.arange(n_bones), np.arange(n_bones), indexing="ij")
    keep = first != second
    return first[keep], second[keep]


def larp_from_skeleton(seq: SkeletonSequence) -> Trajectory:
    """Relative pose of bone b2 in the frame of bone b1, for all ordered pairs.

    Translations are measured in lengths of b1. The result lives on
    SE3Product(B (B - 1)).
    """
    F, length = bone_frames(seq.joints, seq.bones)
    b1, b2 = pair_indices(len(seq.bones))
    rel = se3_inv(F[:, b1]) @ F[:, b2]
    rel[..., :3, 3] /= length[:, b1][..., None]
    return Trajectory(SE3Product(len(b1)), rel)


def covariance_descriptor(Z, rel_eps: float = 1e-8) -> np.ndarray:
    """Unit-determinant covariance of the rows of ``Z`` (n x f).

    Adds ``rel_eps * trace / f`` to the diagonal, then rescales to
    determinant one.
    """
    Z = np.asarray(Z, float)
    if Z.ndim != 2:
        raise ValidationError("feature matrix must be 2-D")
    n, f = Z.shape
    if f < 2 or n < f + 1:
        raise ValidationError(f"need at least f + 1 = {f + 1} rows for {f} features, got {n}")
    if not np.all(np.isfinite(Z)):
        raise ValidationError("feature matrix contains NaN or inf")
    C = np.cov(Z, rowvar=False)
    C = 0.5 * (C + C.T)
    tr = np.trace(C)
    if not tr > 0:
        raise SingularCovariance("features have zero variance")
    C = C + (rel_eps * tr / f) * np.eye(f)
    w = np.linalg.eigvalsh(C)
    if w[0] <= 0 or w[0] < 1e-15 * w[-1]:
        raise SingularCovariance("covariance is singular even after regularisation")
    _, logdet = np.linalg.slogdet(C)
    P = C * np.exp(-logdet / f)
    return 0.5 * (P + P.T)


def covariance_trajectory(frames) -> Trajectory:
    """One descriptor per frame; ``frames`` is a sequence of (n_t, f) matrices."""
    P = np.stack([covariance_descriptor(Z) for Z in frames])
    return Trajectory(SPD(P.shape[1]), P)


def orthonormal_basis(L, rank_tol: float = 1e-10) -> np.ndarray:
    """Reduced QR basis of the columns of ``L`` with R's diagonal made positive."""
    L = np.asarray(L, float)
    Q, R = np.linalg.qr(L)
    d = np.diag(R)
    scale = max(float(np.abs(L).max()), 1e-300)
    if np.any(np.abs(d) <= rank_tol * scale * np.sqrt(L.shape[0])):
        raise DegenerateShape(f"shape matrix has rank below {L.shape[1]}")
    return Q * np.where(d < 0, -1.0, 1.0)


def shape_to_grassmann(L, center: bool = True) -> np.ndarray:
    """Projection onto the column span of the landmark matrix ``L`` (m x k)."""
    L = np.asarray(L, float)
    if L.ndim != 2 or L.shape[0] <= L.shape[1]:
        raise ValidationError("landmarks must be an (m, k) matrix with m > k")
    if not np.all(np.isfinite(L)):
        raise ValidationError("landmarks contain NaN or inf")
    if center:
        L = L - L.mean(axis=0)
    Y = orthonormal_basis(L)
    P = Y @ Y.T
    return 0.5 * (P + P.T)


def shape_trajectory(shapes, center: bool = True) -> Trajectory:
    P = np.stack([shape_to_grassmann(L, center) for L in shapes])
    k = np.asarray(shapes[0]).shape[1]
    return Trajectory(Grassmann(k, P.shape[1]), P)
