"""Common interface for the supported manifolds.

Points and tangents are plain numpy arrays. Every method accepts arbitrary
leading batch dimensions, so ``exp(p, v)`` with ``p`` of shape
``(T, *point_shape)`` evaluates ``T`` exponentials at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidTangent, NumericalError

# Violations below this are treated as zero when validating inputs.
VALID_TOL = 1e-9


@dataclass(frozen=True)
class Manifold:
    """Base class. Subclasses are frozen dataclasses, so they hash and compare
    by their parameters and double as the manifold descriptor."""

    @property
    def kind(self) -> str:
        raise NotImplementedError

    @property
    def params(self) -> dict:
        raise NotImplementedError

    @property
    def point_shape(self) -> tuple:
        raise NotImplementedError

    @property
    def tangent_shape(self) -> tuple:
        raise NotImplementedError

    @property
    def ambient_size(self) -> int:
        return int(np.prod(self.point_shape))

    @property
    def coord_dim(self) -> int:
        """Length of the flat coordinate vector of one tangent (see ``coords``)."""
        raise NotImplementedError

    def __str__(self) -> str:
        return f"{self.kind}:" + ",".join(str(v) for v in self.params.values())

    # --- core geometry -------------------------------------------------------
    def exp(self, p, v):
        raise NotImplementedError

    def log(self, p, q):
        raise NotImplementedError

    def transport(self, v, p, q):
        raise NotImplementedError

    def inner(self, p, u, v):
        """Riemannian inner product, reduced over the tangent axes."""
        return np.sum(self.coords(p, u) * self.coords(p, v), axis=-1)

    def norm(self, p, v):
        return np.sqrt(np.maximum(self.inner(p, v, v), 0.0))

    def dist(self, p, q):
        return self.norm(p, self.log(p, q))

    def coords(self, p, v):
        """Flatten tangents at ``p`` so that the Euclidean dot product of the
        result equals the Riemannian inner product."""
        raise NotImplementedError

    def from_coords(self, p, x):
        raise NotImplementedError

    def geodesic(self, p, q, t):
        return self.exp(p, t * self.log(p, q))

    # --- points --------------------------------------------------------------
    def identity(self):
        """Canonical base point (identity element / I / Q / origin)."""
        raise NotImplementedError

    def validate(self, p) -> dict:
        """Maximum violation of each point invariant; never raises."""
        raise NotImplementedError

    def validate_tangent(self, p, v) -> float:
        raise NotImplementedError

    def project(self, p):
        """Snap a nearly-valid point back onto the manifold."""
        raise NotImplementedError

    def random_point(self, rng, scale=1.0):
        rng = np.random.default_rng(rng)
        base = self.identity()
        return self.exp(base, self.random_tangent(base, scale, rng))

    def random_tangent(self, p, scale, rng):
        """Random tangent(s) at ``p`` with norm exactly ``scale``."""
        rng = np.random.default_rng(rng)
        p = np.asarray(p, dtype=float)
        batch = p.shape[: p.ndim - len(self.point_shape)]
        v = self._random_direction(p, batch, rng)
        n = self.norm(p, v)
        n = np.where(n > 0, n, 1.0)
        scale = np.asarray(scale, dtype=float)
        factor = scale / n
        return v * factor.reshape(factor.shape + (1,) * len(self.tangent_shape))

    def _random_direction(self, p, batch, rng):
        raise NotImplementedError

    def zero_tangent(self, p):
        p = np.asarray(p, dtype=float)
        batch = p.shape[: p.ndim - len(self.point_shape)]
        return np.zeros(batch + self.tangent_shape)

    # --- means ---------------------------------------------------------------
    def karcher_mean(self, points, tol=1e-10, max_iter=100, weights=None):
        """Gradient-descent Riemannian centre of mass over axis 0.

        Returns ``(mean, converged, iterations)``. Trailing batch axes are
        averaged independently.
        """
        x = np.asarray(points, dtype=float)
        n = x.shape[0]
        w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, float) / np.sum(weights)
        wshape = (n,) + (1,) * (x.ndim - 1 - len(self.point_shape) + len(self.tangent_shape))
        mu = x[0].copy()
        converged = False
        it = 0
        for it in range(1, max_iter + 1):
            grad = np.sum(w.reshape(wshape) * self.log(mu[None], x), axis=0)
            gnorm = np.max(self.norm(mu, grad)) if grad.size else 0.0
            if gnorm <= tol:
                converged = True
                break
            mu = self.exp(mu, grad)
        return mu, converged, it

    def mean(self, points, tol=1e-10, max_iter=100):
        mu, _, _ = self.karcher_mean(points, tol=tol, max_iter=max_iter)
        return mu

    # --- helpers -------------------------------------------------------------
    def check_tangent(self, p, v, tol=VALID_TOL):
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(v))):
            raise NumericalError("non-finite point or tangent")
        viol = self.validate_tangent(p, v)
        if viol > tol:
            raise InvalidTangent(f"tangent violates {self.kind} tangent-space constraints by {viol:.3g}")

    def max_violation(self, p) -> float:
        diag = self.validate(p)
        return max(diag.values()) if diag else 0.0
