"""Product of n copies of SE(3).

A point is an ``(n, 4, 4)`` stack of homogeneous transforms. Tangents are
left-trivialised twists ``xi = (w1, w2, w3, v1, v2, v3)`` stored as ``(n, 6)``,
so ``exp_p(xi) = p @ expm(hat(xi))`` and ``log_p(q) = vee(logm(p^-1 q))``.
With this trivialisation, moving a tangent between base points leaves its
twist coordinates unchanged (for SO(3), ``W`` at ``O`` maps to ``O^T W`` at
the identity).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import CutLocusError, ValidationError
from .base import Manifold

# Below this rotation angle the Rodrigues coefficients use Taylor expansions.
SMALL_ANGLE = 1e-7
# Rotation angles within this of pi are treated as being on the cut locus.
CUT_TOL = 1e-6


def hat(w):
    """Skew-symmetric matrix of 3-vectors, batched over leading axes."""
    w = np.asarray(w, dtype=float)
    out = np.zeros(w.shape[:-1] + (3, 3))
    out[..., 0, 1] = -w[..., 2]
    out[..., 0, 2] = w[..., 1]
    out[..., 1, 0] = w[..., 2]
    out[..., 1, 2] = -w[..., 0]
    out[..., 2, 0] = -w[..., 1]
    out[..., 2, 1] = w[..., 0]
    return out


def vee(W):
    W = np.asarray(W, dtype=float)
    return np.stack([W[..., 2, 1], W[..., 0, 2], W[..., 1, 0]], axis=-1)


def _coefficients(theta):
    """Rodrigues / left-Jacobian coefficients.

    a = sin t / t, b = (1 - cos t) / t^2, c = (t - sin t) / t^3,
    e = (1 - (t/2) cot(t/2)) / t^2  (the W^2 coefficient of A^-1).
    """
    small = theta < SMALL_ANGLE
    t = np.where(small, 1.0, theta)
    t2 = t * t
    a = np.where(small, 1.0 - theta**2 / 6.0, np.sin(t) / t)
    b = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(t)) / t2)
    c = np.where(small, 1.0 / 6.0 - theta**2 / 120.0, (t - np.sin(t)) / (t2 * t))
    half = t / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        e_big = (1.0 - half * np.cos(half) / np.sin(half)) / t2
    e = np.where(small, 1.0 / 12.0 + theta**2 / 720.0, e_big)
    return a, b, c, e


def so3_exp(w):
    w = np.asarray(w, dtype=float)
    theta = np.linalg.norm(w, axis=-1)
    a, b, _, _ = _coefficients(theta)
    W = hat(w)
    return np.eye(3) + a[..., None, None] * W + b[..., None, None] * (W @ W)


def so3_log(R):
    """Rotation vector of ``R``; raises CutLocusError when the angle is within
    ``CUT_TOL`` of pi."""
    R = np.asarray(R, dtype=float)
    cos_t = np.clip((np.trace(R, axis1=-2, axis2=-1) - 1.0) / 2.0, -1.0, 1.0)
    s_vec = vee(R - np.swapaxes(R, -1, -2)) / 2.0
    sin_t = np.linalg.norm(s_vec, axis=-1)
    theta = np.arctan2(sin_t, cos_t)
    if np.any(np.pi - theta < CUT_TOL):
        bad = np.argwhere(np.pi - theta < CUT_TOL)
        raise CutLocusError("rotation angle too close to pi for a unique logarithm",
                            index=[tuple(int(i) for i in b) for b in bad])
    small = theta < SMALL_ANGLE
    safe_sin = np.where(small, 1.0, sin_t)
    scale = np.where(small, 1.0 + theta**2 / 6.0, theta / safe_sin)
    w = scale[..., None] * s_vec
    # Near pi the antisymmetric part loses precision; recover the axis from
    # the symmetric part instead.
    near_pi = cos_t < -0.5
    if np.any(near_pi):
        Rn = R[near_pi]
        cn = cos_t[near_pi]
        B = (Rn + np.swapaxes(Rn, -1, -2)) / 2.0 - cn[:, None, None] * np.eye(3)
        diag = np.diagonal(B, axis1=-2, axis2=-1)
        col = np.argmax(diag, axis=-1)
        idx = np.arange(len(col))
        axis = B[idx, :, col] / np.sqrt(diag[idx, col] * (1.0 - cn))[:, None]
        axis /= np.linalg.norm(axis, axis=-1, keepdims=True)
        sign = np.sign(np.sum(axis * s_vec[near_pi], axis=-1))
        sign = np.where(sign == 0, 1.0, sign)
        w[near_pi] = (sign * theta[near_pi])[:, None] * axis
    return w


def se3_exp(xi):
    """Group exponential of twists ``(..., 6)`` -> ``(..., 4, 4)``."""
    xi = np.asarray(xi, dtype=float)
    w, v = xi[..., :3], xi[..., 3:]
    theta = np.linalg.norm(w, axis=-1)
    a, b, c, _ = _coefficients(theta)
    W = hat(w)
    W2 = W @ W
    eye = np.eye(3)
    R = eye + a[..., None, None] * W + b[..., None, None] * W2
    A = eye + b[..., None, None] * W + c[..., None, None] * W2
    out = np.zeros(xi.shape[:-1] + (4, 4))
    out[..., :3, :3] = R
    out[..., :3, 3] = np.einsum("...ij,...j->...i", A, v)
    out[..., 3, 3] = 1.0
    return out


def se3_log(g):
    g = np.asarray(g, dtype=float)
    w = so3_log(g[..., :3, :3])
    theta = np.linalg.norm(w, axis=-1)
    _, _, _, e = _coefficients(theta)
    W = hat(w)
    Ainv = np.eye(3) - 0.5 * W + e[..., None, None] * (W @ W)
    v = np.einsum("...ij,...j->...i", Ainv, g[..., :3, 3])
    return np.concatenate([w, v], axis=-1)


def se3_inv(g):
    g = np.asarray(g, dtype=float)
    Rt = np.swapaxes(g[..., :3, :3], -1, -2)
    out = np.zeros_like(g)
    out[..., :3, :3] = Rt
    out[..., :3, 3] = -np.einsum("...ij,...j->...i", Rt, g[..., :3, 3])
    out[..., 3, 3] = 1.0
    return out


def project_rotation(M):
    """Closest rotation (Frobenius) to each 3x3 matrix, with det correction."""
    U, _, Vt = np.linalg.svd(M)
    d = np.sign(np.linalg.det(U @ Vt))
    d = np.where(d == 0, 1.0, d)
    D = np.ones(M.shape[:-2] + (3,))
    D[..., 2] = d
    return (U * D[..., None, :]) @ Vt


@dataclass(frozen=True)
class SE3Product(Manifold):
    """SE(3) x ... x SE(3) with the unweighted product metric on twists."""

    n: int
    # Extrinsic (project-the-average) mean by default; excluded from equality.
    intrinsic_mean: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("SE3Product needs n >= 1")

    @property
    def kind(self):
        return "se3"

    @property
    def params(self):
        return {"n": self.n}

    @property
    def point_shape(self):
        return (self.n, 4, 4)

    @property
    def tangent_shape(self):
        return (self.n, 6)

    @property
    def coord_dim(self):
        return 6 * self.n

    def exp(self, p, v):
        return np.asarray(p, float) @ se3_exp(v)

    def log(self, p, q):
        return se3_log(se3_inv(p) @ np.asarray(q, float))

    def transport(self, v, p, q):
        shape = np.broadcast_shapes(np.shape(v), np.shape(q)[:-2] + (6,))
        return np.broadcast_to(v, shape).copy()

    def coords(self, p, v):
        v = np.asarray(v, float)
        return v.reshape(v.shape[:-2] + (6 * self.n,))

    def from_coords(self, p, x):
        x = np.asarray(x, float)
        return x.reshape(x.shape[:-1] + (self.n, 6))

    def identity(self):
        return np.broadcast_to(np.eye(4), (self.n, 4, 4)).copy()

    def validate(self, p):
        p = np.asarray(p, float)
        if not np.all(np.isfinite(p)):
            return {"finite": np.inf}
        R = p[..., :3, :3]
        bottom = np.abs(p[..., 3, :] - np.array([0.0, 0.0, 0.0, 1.0])).max()
        orth = np.abs(np.swapaxes(R, -1, -2) @ R - np.eye(3)).max()
        det = np.abs(np.linalg.det(R) - 1.0).max()
        return {"bottom_row": float(bottom), "orthogonality": float(orth), "determinant": float(det)}

    def validate_tangent(self, p, v):
        v = np.asarray(v)
        if v.shape[-2:] != (self.n, 6):
            return np.inf
        return 0.0 if np.all(np.isfinite(v)) else np.inf

    def project(self, p):
        p = np.array(p, dtype=float)
        p[..., :3, :3] = project_rotation(p[..., :3, :3])
        p[..., 3, :] = (0.0, 0.0, 0.0, 1.0)
        return p

    def _random_direction(self, p, batch, rng):
        return rng.standard_normal(batch + (self.n, 6))

    def extrinsic_mean(self, points, weights=None):
        """Average the matrices, then project rotations back onto SO(3)."""
        x = np.asarray(points, float)
        if weights is None:
            m = x.mean(axis=0)
        else:
            w = np.asarray(weights, float) / np.sum(weights)
            m = np.tensordot(w, x, axes=1)
        return self.project(m)

    def karcher_mean(self, points, tol=1e-10, max_iter=100, weights=None):
        if self.intrinsic_mean:
            return super().karcher_mean(points, tol=tol, max_iter=max_iter, weights=weights)
        return self.extrinsic_mean(points, weights), True, 1

    def intrinsic(self) -> "SE3Product":
        return SE3Product(self.n, intrinsic_mean=True)
