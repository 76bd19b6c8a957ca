"""Grassmann manifold G(k, m) in projection-matrix form.

Points are rank-k orthogonal projections ``P`` (m x m). A tangent at ``P``
is the skew-symmetric generator ``X`` of the lifted O(m) geodesic
``t -> expm(tX) P expm(-tX)``; it satisfies ``X = P X (I-P) + (I-P) X P``.
The metric is ``<X1, X2> = trace(X1 X2^T)``, so a geodesic with principal
angles ``theta`` has length ``sqrt(2) * |theta|``.

Computations go through an orthonormal basis ``Y`` (``P = Y Y^T``) and the
SVD-based geodesic formulas; results are returned in projection form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import CutLocusError, ValidationError
from .base import Manifold

CUT_TOL = 1e-6


def basis(P, k):
    """Orthonormal ``m x k`` basis of the range of each projection."""
    _, U = np.linalg.eigh(0.5 * (P + np.swapaxes(P, -1, -2)))
    return U[..., -k:]


def _outer(Y):
    P = Y @ np.swapaxes(Y, -1, -2)
    return 0.5 * (P + np.swapaxes(P, -1, -2))


def _generator(Y, delta):
    """Skew generator X = delta Y^T - Y delta^T for horizontal ``delta``."""
    A = delta @ np.swapaxes(Y, -1, -2)
    return A - np.swapaxes(A, -1, -2)


@dataclass(frozen=True)
class Grassmann(Manifold):
    k: int
    m: int

    def __post_init__(self):
        if not 1 <= self.k < self.m:
            raise ValidationError("Grassmann needs 1 <= k < m")

    @property
    def kind(self):
        return "grassmann"

    @property
    def params(self):
        return {"k": self.k, "m": self.m}

    @property
    def point_shape(self):
        return (self.m, self.m)

    @property
    def tangent_shape(self):
        return (self.m, self.m)

    @property
    def coord_dim(self):
        return self.m * self.m

    def exp(self, p, v):
        p = np.asarray(p, float)
        v = np.asarray(v, float)
        p, v = np.broadcast_arrays(p, v)
        Y = basis(p, self.k)
        delta = v @ Y
        U, s, Vt = np.linalg.svd(delta, full_matrices=False)
        Yv = Y @ np.swapaxes(Vt, -1, -2)
        Y1 = (Yv * np.cos(s)[..., None, :] + U * np.sin(s)[..., None, :]) @ Vt
        return _outer(Y1)

    def _log_basis(self, Y1, Y2):
        """Horizontal lift ``delta`` at Y1 of the geodesic reaching span(Y2)."""
        M = np.swapaxes(Y1, -1, -2) @ Y2
        U1, c, V1t = np.linalg.svd(M)
        Y2r = Y2 @ np.swapaxes(V1t, -1, -2)  # Y2 V1; columns are principal vectors
        W = Y2r - Y1 @ (U1 * c[..., None, :])
        s = np.linalg.norm(W, axis=-2)
        theta = np.arctan2(s, c)
        if np.any(theta > np.pi / 2 - CUT_TOL):
            bad = np.argwhere(np.max(theta, axis=-1) > np.pi / 2 - CUT_TOL)
            raise CutLocusError("principal angle too close to pi/2; Grassmann log is not unique",
                                index=[tuple(int(i) for i in b) for b in bad])
        tiny = s < 1e-300
        ratio = np.where(tiny, 1.0, theta / np.where(tiny, 1.0, s))
        return (W * ratio[..., None, :]) @ np.swapaxes(U1, -1, -2), theta

    def log(self, p, q):
        p = np.asarray(p, float)
        q = np.asarray(q, float)
        Y1 = basis(p, self.k)
        Y2 = basis(q, self.k)
        Y1, Y2 = np.broadcast_arrays(Y1, Y2)
        delta, _ = self._log_basis(Y1, Y2)
        return _generator(Y1, delta)

    def dist(self, p, q):
        Y1 = basis(np.asarray(p, float), self.k)
        Y2 = basis(np.asarray(q, float), self.k)
        Y1, Y2 = np.broadcast_arrays(Y1, Y2)
        c = np.clip(np.linalg.svd(np.swapaxes(Y1, -1, -2) @ Y2, compute_uv=False), 0.0, 1.0)
        # principal angles via arcsin of the residual for small-angle accuracy
        R = Y2 - Y1 @ (np.swapaxes(Y1, -1, -2) @ Y2)
        s = np.clip(np.linalg.svd(R, compute_uv=False)[..., ::-1], 0.0, 1.0)
        theta = np.arctan2(s[..., : self.k], c)
        return np.sqrt(2.0) * np.linalg.norm(theta, axis=-1)

    def transvection(self, p, q):
        """Orthogonal ``E = expm(log_p(q))``; conjugation by E moves P to Q
        along the geodesic and realises parallel transport."""
        p = np.asarray(p, float)
        q = np.asarray(q, float)
        Y1 = basis(p, self.k)
        Y2 = basis(q, self.k)
        Y1, Y2 = np.broadcast_arrays(Y1, Y2)
        delta, _ = self._log_basis(Y1, Y2)
        U, s, Vt = np.linalg.svd(delta, full_matrices=False)
        Yv = Y1 @ np.swapaxes(Vt, -1, -2)
        cm1 = (np.cos(s) - 1.0)[..., None, :]
        sn = np.sin(s)[..., None, :]
        Ut = np.swapaxes(U, -1, -2)
        Yvt = np.swapaxes(Yv, -1, -2)
        E = np.eye(self.m) + (Yv * cm1) @ Yvt + (U * cm1) @ Ut + (U * sn) @ Yvt - (Yv * sn) @ Ut
        return E

    def transport(self, v, p, q):
        E = self.transvection(p, q)
        return E @ np.asarray(v, float) @ np.swapaxes(E, -1, -2)

    def coords(self, p, v):
        v = np.asarray(v, float)
        return v.reshape(v.shape[:-2] + (self.m * self.m,))

    def from_coords(self, p, x):
        x = np.asarray(x, float)
        X = x.reshape(x.shape[:-1] + (self.m, self.m))
        return self.horizontal(p, X)

    def horizontal(self, p, X):
        """Project an arbitrary matrix onto the tangent space at ``p``."""
        p = np.asarray(p, float)
        X = 0.5 * (X - np.swapaxes(X, -1, -2))
        Ip = np.eye(self.m) - p
        return p @ X @ Ip + Ip @ X @ p

    def identity(self):
        Q = np.zeros((self.m, self.m))
        Q[np.arange(self.k), np.arange(self.k)] = 1.0
        return Q

    def validate(self, p):
        p = np.asarray(p, float)
        if not np.all(np.isfinite(p)):
            return {"finite": np.inf}
        symm = np.abs(p - np.swapaxes(p, -1, -2)).max()
        idem = np.abs(p @ p - p).max()
        tr = np.abs(np.trace(p, axis1=-2, axis2=-1) - self.k).max()
        return {"symmetry": float(symm), "idempotency": float(idem), "trace": float(tr)}

    def validate_tangent(self, p, v):
        v = np.asarray(v, float)
        scale = max(1.0, float(np.abs(v).max()))
        skew = np.abs(v + np.swapaxes(v, -1, -2)).max()
        horiz = np.abs(self.horizontal(p, v) - v).max()
        return float(max(skew, horiz)) / scale

    def project(self, p):
        return _outer(basis(np.asarray(p, float), self.k))

    def _random_direction(self, p, batch, rng):
        Y = basis(np.asarray(p, float), self.k)
        G = rng.standard_normal(batch + (self.m, self.k))
        delta = G - Y @ (np.swapaxes(Y, -1, -2) @ G)
        return _generator(Y, delta)
