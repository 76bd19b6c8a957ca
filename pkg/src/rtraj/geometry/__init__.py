"""Differential-geometric kernels for SE(3)^n, SPD, Grassmann and R^n.

The manifold classes carry the maths; the functions below are thin checked
wrappers that validate inputs before delegating.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import BasePointMismatch, EmptyInput, NumericalError, ValidationError
from .base import VALID_TOL, Manifold
from .euclidean import Euclidean
from .grassmann import Grassmann
from .se3 import SE3Product, se3_exp, se3_log, so3_exp, so3_log
from .spd import SPD

__all__ = [
    "Manifold", "SE3Product", "SPD", "Grassmann", "Euclidean", "Tangent",
    "parse_manifold", "manifold_from_dict", "exp_map", "log_map", "parallel_transport",
    "inner", "geodesic_distance", "karcher_mean_points", "random_tangent",
    "validate_point", "se3_exp", "se3_log", "so3_exp", "so3_log",
]


def parse_manifold(text: str) -> Manifold:
    """Parse ``se3:n``, ``spd:d``, ``grassmann:k,m`` or ``euclidean:n``."""
    try:
        kind, _, args = text.strip().partition(":")
        vals = [int(a) for a in args.split(",") if a.strip()]
        kind = kind.lower()
        if kind in ("se3", "se3product"):
            (n,) = vals
            return SE3Product(n)
        if kind == "spd":
            (d,) = vals
            return SPD(d)
        if kind == "grassmann":
            k, m = vals
            return Grassmann(k, m)
        if kind == "euclidean":
            (n,) = vals
            return Euclidean(n)
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"bad manifold descriptor {text!r}") from exc
    raise ValidationError(f"unknown manifold kind in {text!r}")


def manifold_from_dict(d: dict) -> Manifold:
    kind = d["kind"]
    p = d.get("params", {})
    if kind == "se3":
        return SE3Product(int(p["n"]))
    if kind == "spd":
        return SPD(int(p["d"]))
    if kind == "grassmann":
        return Grassmann(int(p["k"]), int(p["m"]))
    if kind == "euclidean":
        return Euclidean(int(p["dim"]))
    raise ValidationError(f"unknown manifold kind {kind!r}")


@dataclass(frozen=True)
class Tangent:
    """A tangent vector together with its base point."""

    base: np.ndarray
    data: np.ndarray


def _unwrap(p, v):
    if isinstance(v, Tangent):
        if p is not None and not np.allclose(v.base, p, atol=VALID_TOL, rtol=0):
            raise BasePointMismatch("tangent is anchored at a different base point")
        return v.data
    return np.asarray(v, float)


def _finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericalError("non-finite input")


def exp_map(spec: Manifold, p, v, check: bool = True):
    p = np.asarray(p, float)
    v = _unwrap(p, v)
    if check:
        spec.check_tangent(p, v)
    out = spec.exp(p, v)
    _finite(out)
    return out


def log_map(spec: Manifold, p, q):
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    _finite(p, q)
    return spec.log(p, q)


def parallel_transport(spec: Manifold, v, p, q, check: bool = True):
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    v = _unwrap(p, v)
    if check:
        spec.check_tangent(p, v)
    return spec.transport(v, p, q)


def inner(spec: Manifold, p, u, v):
    p = np.asarray(p, float)
    return spec.inner(p, _unwrap(p, u), _unwrap(p, v))


def geodesic_distance(spec: Manifold, p, q):
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    _finite(p, q)
    return spec.dist(p, q)


class KarcherResult(NamedTuple):
    point: np.ndarray
    converged: bool
    iterations: int


def karcher_mean_points(spec: Manifold, points, tol: float = 1e-10, max_iter: int = 100,
                        full_output: bool = False):
    """Riemannian centre of mass of ``points`` (stacked on axis 0).

    For SE3Product the default is the extrinsic mean; use
    ``spec.intrinsic()`` for the iterative one.
    """
    pts = np.asarray(points, float)
    if pts.ndim == len(spec.point_shape) or pts.shape[0] == 0:
        raise EmptyInput("karcher_mean_points needs at least one point")
    _finite(pts)
    mu, converged, it = spec.karcher_mean(pts, tol=tol, max_iter=max_iter)
    if full_output:
        return KarcherResult(mu, converged, it)
    return mu


def random_tangent(spec: Manifold, p, scale: float, rng_seed=None):
    if scale < 0:
        raise ValidationError("scale must be non-negative")
    return spec.random_tangent(np.asarray(p, float), scale, np.random.default_rng(rng_seed))


def validate_point(spec: Manifold, p) -> dict:
    return spec.validate(np.asarray(p, float))
