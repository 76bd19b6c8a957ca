from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .base import Manifold


@dataclass(frozen=True)
class Euclidean(Manifold):
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError("Euclidean dimension must be >= 1")

    kind = property(lambda self: "euclidean")
    params = property(lambda self: {"dim": self.dim})
    point_shape = property(lambda self: (self.dim,))
    tangent_shape = property(lambda self: (self.dim,))
    coord_dim = property(lambda self: self.dim)

    def exp(self, p, v):
        return np.asarray(p, float) + v

    def log(self, p, q):
        return np.asarray(q, float) - p

    def transport(self, v, p, q):
        return np.broadcast_to(v, np.broadcast_shapes(np.shape(v), np.shape(q))).copy()

    def dist(self, p, q):
        return np.linalg.norm(np.asarray(q, float) - p, axis=-1)

    def coords(self, p, v):
        return np.asarray(v, float)

    def from_coords(self, p, x):
        return np.asarray(x, float)

    def identity(self):
        return np.zeros(self.dim)

    def validate(self, p):
        return {"finite": 0.0 if np.all(np.isfinite(p)) else np.inf}

    def validate_tangent(self, p, v):
        return 0.0

    def project(self, p):
        return np.asarray(p, float)

    def _random_direction(self, p, batch, rng):
        return rng.standard_normal(batch + (self.dim,))

    def karcher_mean(self, points, tol=1e-10, max_iter=100, weights=None):
        x = np.asarray(points, float)
        if weights is None:
            return x.mean(axis=0), True, 1
        w = np.asarray(weights, float) / np.sum(weights)
        return np.tensordot(w, x, axes=1), True, 1
