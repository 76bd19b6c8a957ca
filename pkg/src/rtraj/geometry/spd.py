"""Unit-determinant SPD matrices P(d).

A tangent at ``P`` is stored as ``V = P A`` with ``A`` symmetric and
traceless, and ``<P A, P B> = trace(A B^T)``. The maps are

    exp_P(V)       = sqrtm(P expm(2 P^-1 V) P)
    log_P1(P2)     = P1 logm(P12),        P12 = sqrtm(P1^-1 P2^2 P1^-1)
    transport V    = P2 T^T (P1^-1 V) T,  T   = P12^-1 P1^-1 P2

``T`` is orthogonal, so transport is an isometry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .base import Manifold


def sym(M):
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def sym_apply(S, fn):
    """Apply a scalar function to the eigenvalues of symmetric matrices."""
    w, U = np.linalg.eigh(sym(S))
    return (U * fn(w)[..., None, :]) @ np.swapaxes(U, -1, -2)


def spd_sqrt(S):
    return sym_apply(S, lambda w: np.sqrt(np.maximum(w, 0.0)))


def spd_log(S):
    return sym_apply(S, np.log)


def sym_expm(S):
    return sym_apply(S, np.exp)


@dataclass(frozen=True)
class SPD(Manifold):
    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValidationError("SPD needs d >= 2")

    @property
    def kind(self):
        return "spd"

    @property
    def params(self):
        return {"d": self.d}

    @property
    def point_shape(self):
        return (self.d, self.d)

    @property
    def tangent_shape(self):
        return (self.d, self.d)

    @property
    def coord_dim(self):
        return self.d * self.d

    def _body(self, p, v):
        # A = P^-1 V
        return np.linalg.solve(p, v)

    def exp(self, p, v):
        p = np.asarray(p, float)
        A = sym(self._body(p, v))
        return sym(spd_sqrt(p @ sym_expm(2.0 * A) @ p))

    def _p12(self, p1, p2):
        p1inv = sym(np.linalg.inv(p1))
        return p1inv, p1inv @ p2 @ p2 @ p1inv

    def log(self, p, q):
        p = np.asarray(p, float)
        _, S = self._p12(p, np.asarray(q, float))
        # logm(sqrtm(S)) = logm(S) / 2
        return p @ (0.5 * spd_log(S))

    def dist(self, p, q):
        _, S = self._p12(np.asarray(p, float), np.asarray(q, float))
        w = np.linalg.eigvalsh(sym(S))
        return 0.5 * np.sqrt(np.sum(np.log(w) ** 2, axis=-1))

    def transport(self, v, p, q):
        p = np.asarray(p, float)
        q = np.asarray(q, float)
        p1inv, S = self._p12(p, q)
        p12inv = sym_apply(S, lambda w: 1.0 / np.sqrt(w))
        T = p12inv @ p1inv @ q
        B = self._body(p, v)
        return q @ np.swapaxes(T, -1, -2) @ B @ T

    def coords(self, p, v):
        A = self._body(np.asarray(p, float), v)
        return A.reshape(A.shape[:-2] + (self.d * self.d,))

    def from_coords(self, p, x):
        x = np.asarray(x, float)
        A = x.reshape(x.shape[:-1] + (self.d, self.d))
        return np.asarray(p, float) @ A

    def identity(self):
        return np.eye(self.d)

    def validate(self, p):
        p = np.asarray(p, float)
        if not np.all(np.isfinite(p)):
            return {"finite": np.inf}
        symm = np.abs(p - np.swapaxes(p, -1, -2)).max()
        wmin = np.linalg.eigvalsh(sym(p)).min()
        det = np.abs(np.linalg.det(p) - 1.0).max()
        return {"symmetry": float(symm), "positivity": float(max(0.0, -wmin)), "determinant": float(det)}

    def validate_tangent(self, p, v):
        A = self._body(np.asarray(p, float), np.asarray(v, float))
        scale = max(1.0, float(np.abs(A).max()))
        asym = np.abs(A - np.swapaxes(A, -1, -2)).max()
        tr = np.abs(np.trace(A, axis1=-2, axis2=-1)).max()
        return float(max(asym, tr)) / scale

    def project(self, p):
        """Symmetrise, then rescale to unit determinant."""
        p = sym(np.asarray(p, float))
        det = np.linalg.det(p)
        return p / (det ** (1.0 / self.d))[..., None, None]

    def _random_direction(self, p, batch, rng):
        G = rng.standard_normal(batch + (self.d, self.d))
        A = sym(G)
        A = A - (np.trace(A, axis1=-2, axis2=-1) / self.d)[..., None, None] * np.eye(self.d)
        return np.asarray(p, float) @ A
