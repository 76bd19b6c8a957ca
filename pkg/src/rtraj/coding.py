"""Shooting vectors of aligned trajectories and Euclidean codes for them.

Trajectories are aligned to their elastic mean ``mu``; each aligned
trajectory becomes one row ``[v(1) ... v(T)]`` of tangent coordinates with
``v(t) = log_{mu(t)}(alpha(t))``. Any Euclidean coder can then act on the
rows, and ``exp_{mu(t)}`` maps decoded rows back onto the manifold.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import orthogonal_mp

from .elastic import (DEFAULT_STEPS, MeanResult, Trajectory, align, compute_tsrvf, trajectory_mean)
from .errors import DegenerateData, RankError, ValidationError
from .geometry import Manifold

METHODS = ("pca", "ksvd", "lcksvd")


@dataclass
class ShootingSet:
    mean: Trajectory
    vectors: np.ndarray  # (N, D) with D = T * coord_dim
    aligned: list
    warps: np.ndarray
    reference: np.ndarray
    mean_result: MeanResult | None = field(default=None, repr=False)

    @property
    def manifold(self) -> Manifold:
        return self.mean.manifold

    @property
    def T(self) -> int:
        return self.mean.T

    @property
    def D(self) -> int:
        return self.vectors.shape[1]

    def tangents(self, i: int) -> np.ndarray:
        """Row ``i`` as T tangents at ``mu(t)``."""
        return row_to_tangents(self.mean, self.vectors[i])

    def replay(self, i: int) -> Trajectory:
        return exp_row(self.mean, self.vectors[i])


@dataclass
class Codebook:
    method: str
    basis: np.ndarray  # (D, d)
    mean: Trajectory
    reference: np.ndarray
    center: np.ndarray | None = None  # (D,), PCA only
    sparsity: int | None = None
    label_map: list | None = None  # class label of each atom (LC-KSVD)
    explained_variance: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)

    @property
    def manifold(self) -> Manifold:
        return self.mean.manifold

    @property
    def T(self) -> int:
        return self.mean.T

    @property
    def d(self) -> int:
        return self.basis.shape[1]

    @property
    def D(self) -> int:
        return self.basis.shape[0]


def row_to_tangents(mean: Trajectory, row) -> np.ndarray:
    M = mean.manifold
    x = np.asarray(row, float).reshape(mean.T, M.coord_dim)
    return M.from_coords(mean.samples, x)


def tangents_to_row(mean: Trajectory, v) -> np.ndarray:
    return mean.manifold.coords(mean.samples, v).reshape(-1)


def exp_row(mean: Trajectory, row) -> Trajectory:
    """Reconstruction ``alpha(t) = exp_{mu(t)}(v(t))``."""
    return Trajectory(mean.manifold, mean.manifold.exp(mean.samples, row_to_tangents(mean, row)))


def shooting_row(mean: Trajectory, traj: Trajectory) -> np.ndarray:
    return tangents_to_row(mean, mean.manifold.log(mean.samples, traj.samples))


def _pmap(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def align_to_mean(mean: Trajectory, reference, traj: Trajectory, target=None,
                  steps=DEFAULT_STEPS, refine: int = 16):
    """One DP pass warping ``traj`` onto ``mean``; returns (aligned, gamma)."""
    if traj.manifold != mean.manifold or traj.T != mean.T:
        raise ValidationError("trajectory does not match the mean's manifold and length")
    target = compute_tsrvf(mean, reference) if target is None else target
    return align(target, traj, steps=steps, refine=refine)


def shooting_set(trajs: Sequence[Trajectory], c=None, tol: float = 1e-6, max_iter: int = 50,
                 threads: int = 1, **mean_kwargs) -> ShootingSet:
    """Elastic mean, then shooting vectors of every trajectory aligned to it.

    The final alignment is the same single DP pass that ``encode`` performs,
    so encoding a training trajectory reproduces its training row exactly.
    """
    res = trajectory_mean(trajs, c=c, tol=tol, max_iter=max_iter, threads=threads, **mean_kwargs)
    mu, ref = res.mean, res.reference
    target = compute_tsrvf(mu, ref)
    refine = mean_kwargs.get("refine", 16)
    steps = mean_kwargs.get("steps", DEFAULT_STEPS)
    pairs = _pmap(lambda tr: align_to_mean(mu, ref, tr, target, steps, refine), list(trajs), threads)
    aligned = [p[0] for p in pairs]
    V = np.stack([shooting_row(mu, a) for a in aligned])
    return ShootingSet(mean=mu, vectors=V, aligned=aligned, warps=np.array([p[1] for p in pairs]),
                       reference=ref, mean_result=res)


# --------------------------------------------------------------------------
# codebook learning
# --------------------------------------------------------------------------

def _orient(W, vals):
    """Deterministic order and sign for principal directions (columns of W).

    Descending eigenvalue; equal eigenvalues ordered by the index of the
    first non-negligible coefficient; each column's first such entry made
    positive.
    """
    tiny = 1e-12 * max(1.0, float(np.abs(W).max()) if W.size else 1.0)
    first = np.array([int(np.argmax(np.abs(W[:, k]) > tiny)) for k in range(W.shape[1])])
    signs = np.sign(W[first, np.arange(W.shape[1])])
    W = W * np.where(signs == 0, 1.0, signs)
    scale = max(float(vals.max()) if vals.size else 0.0, 1e-300)
    key = np.round(vals / scale, 12)
    order = np.lexsort((first, -key))
    return W[:, order], vals[order]


def pca_basis(X, d, complete: bool = False):
    """Top-d principal directions of the rows of ``X`` (centred inside).

    With ``complete`` the basis may extend past the data rank (up to D),
    padded with zero-variance directions.
    """
    X = np.asarray(X, float)
    N, D = X.shape
    limit = D if complete else min(N, D)
    if not 1 <= d <= limit:
        raise RankError(f"d={d} must lie in [1, {limit}]")
    center = X.mean(axis=0)
    Xc = X - center
    _, S, Wt = np.linalg.svd(Xc, full_matrices=complete and d > min(N, D))
    vals = np.zeros(len(Wt))
    vals[: len(S)] = S**2 / max(N - 1, 1)
    W, vals = _orient(Wt.T, vals)
    return W[:, :d], center, vals


def _check_data(V):
    V = np.asarray(V, float)
    if V.ndim != 2 or len(V) == 0:
        raise ValidationError("expected a non-empty (N, D) matrix")
    if len(V) > 1 and np.all(V == V[0]):
        raise DegenerateData("all shooting vectors are identical")
    return V


def _omp(B, Y, s):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        warnings.simplefilter("ignore", ConvergenceWarning)
        C = orthogonal_mp(B, Y, n_nonzero_coefs=s)
    C = np.asarray(C, float)
    return C.reshape(B.shape[1], -1)


def _column_errors(Y, B, C):
    R = Y - B @ C
    return np.einsum("ij,ij->j", R, R)


def ksvd(Y, d, s, seed=0, max_iter: int = 50, tol: float = 1e-6, B0=None):
    """K-SVD on the columns of ``Y`` (D x N).

    Returns ``(B, C, errors)`` with unit-norm atoms ``B`` (D x d), codes ``C``
    (d x N, at most ``s`` nonzeros per column) and the squared
    reconstruction error after every alternation.
    """
    Y = np.asarray(Y, float)
    D, N = Y.shape
    if not 1 <= s <= d:
        raise ValidationError("sparsity must satisfy 1 <= s <= d")
    rng = np.random.default_rng(seed)
    if B0 is None:
        if d > N:
            raise RankError(f"d={d} atoms cannot be initialised from N={N} samples")
        B = Y[:, rng.choice(N, size=d, replace=False)].copy()
    else:
        B = np.array(B0, float)
    norms = np.linalg.norm(B, axis=0)
    dead = norms < 1e-12
    if np.any(dead):
        B[:, dead] = rng.standard_normal((D, int(dead.sum())))
        norms = np.linalg.norm(B, axis=0)
    B /= norms
    C = _omp(B, Y, s)
    errs = [float(_column_errors(Y, B, C).sum())]
    for _ in range(max_iter):
        # sparse coding, keeping a column's old code if OMP did worse
        C_new = _omp(B, Y, s)
        keep = _column_errors(Y, B, C_new) > _column_errors(Y, B, C)
        C_new[:, keep] = C[:, keep]
        C = C_new
        R = Y - B @ C
        for k in range(B.shape[1]):
            users = np.flatnonzero(C[k])
            if len(users) == 0:
                continue
            Ek = R[:, users] + np.outer(B[:, k], C[k, users])
            U, S, Vt = np.linalg.svd(Ek, full_matrices=False)
            B[:, k] = U[:, 0]
            C[k, users] = S[0] * Vt[0]
            R[:, users] = Ek - np.outer(B[:, k], C[k, users])
        # unused atoms are re-seeded on the worst-represented sample; this
        # leaves the objective unchanged because their codes are zero
        unused = np.flatnonzero(~np.any(C != 0, axis=1))
        if len(unused):
            worst = np.argsort(-np.einsum("ij,ij->j", R, R), kind="stable")
            for k, j in zip(unused, worst):
                col = Y[:, j]
                if np.linalg.norm(col) > 1e-12:
                    B[:, k] = col / np.linalg.norm(col)
        err = float(np.einsum("ij,ij->", R, R))
        prev = errs[-1]
        errs.append(err)
        if prev - err <= tol * max(prev, 1e-300):
            break
    return B, C, errs


def _split_atoms(d, classes):
    n = len(classes)
    if d < n:
        raise RankError(f"LC-KSVD needs at least one atom per class (d={d}, classes={n})")
    counts = [d // n + (1 if i < d % n else 0) for i in range(n)]
    return [cls for cls, k in zip(classes, counts) for _ in range(k)]


def lcksvd(Y, labels, d, s, kappa: float = 1.0, seed=0, max_iter: int = 50, tol: float = 1e-6,
           ridge: float = 1e-6):
    """LC-KSVD1: K-SVD on ``[Y; sqrt(kappa) Q]`` with ``[B; sqrt(kappa) A]``.

    ``Q`` assigns each atom to one class and marks the samples of that class,
    so codes are pushed to use their own class's atoms. Returns
    ``(B, C, errors, label_map)``.
    """
    Y = np.asarray(Y, float)
    D, N = Y.shape
    labels = list(labels)
    if len(labels) != N:
        raise ValidationError("one label per sample is required")
    classes = sorted(set(labels), key=str)
    label_map = _split_atoms(d, classes)
    atom_lab = np.array([str(a) for a in label_map])
    lab = np.array([str(x) for x in labels])
    Q = (atom_lab[:, None] == lab[None, :]).astype(float)
    rng = np.random.default_rng(seed)
    B0 = np.empty((D, d))
    for cls in classes:
        atoms = np.flatnonzero(atom_lab == str(cls))
        members = np.flatnonzero(lab == str(cls))
        pick = rng.choice(members, size=len(atoms), replace=len(atoms) > len(members))
        B0[:, atoms] = Y[:, pick]
    norms = np.linalg.norm(B0, axis=0)
    norms[norms < 1e-12] = 1.0
    B0 /= norms
    C0 = _omp(B0, Y, s)
    A0 = Q @ C0.T @ np.linalg.inv(C0 @ C0.T + ridge * np.eye(d))
    w = np.sqrt(kappa)
    Baug, C, errs = ksvd(np.vstack([Y, w * Q]), d, s, seed=seed, max_iter=max_iter, tol=tol,
                         B0=np.vstack([B0, w * A0]))
    B = Baug[:D]
    norms = np.linalg.norm(B, axis=0)
    norms[norms < 1e-12] = 1.0
    return B / norms, C * norms[:, None], errs, label_map


def fit_codebook(V: ShootingSet, method: str = "pca", d: int = 10, s: int | None = None,
                 labels=None, kappa: float = 1.0, seed: int = 0, max_iter: int = 50):
    """Learn a basis for the shooting vectors; returns ``(codebook, codes)``
    with codes as a (d, N) matrix."""
    method = method.lower()
    if method not in METHODS:
        raise ValidationError(f"unknown coding method {method!r}; choose from {METHODS}")
    X = _check_data(V.vectors)
    N, D = X.shape
    if not 1 <= d <= min(N, D) or d >= D:
        raise RankError(f"d={d} must satisfy 1 <= d <= min(N, D) and d < D (N={N}, D={D})")
    if (labels is not None) != (method == "lcksvd"):
        raise ValidationError("labels are required for lcksvd and only for lcksvd")
    prov = {"method": method, "d": d, "seed": seed, "N": N, "D": D}
    if method == "pca":
        if N > 1 and np.allclose(X, X.mean(0), atol=0, rtol=0):
            raise DegenerateData("all shooting vectors are identical")
        B, center, vals = pca_basis(X, d)
        cb = Codebook("pca", B, V.mean, V.reference, center=center, explained_variance=vals,
                      provenance=prov)
        return cb, B.T @ (X - center).T
    s = 1 if s is None else int(s)
    prov.update({"sparsity": s, "max_iter": max_iter})
    if method == "ksvd":
        B, C, errs = ksvd(X.T, d, s, seed=seed, max_iter=max_iter)
        prov["errors"] = errs
        return Codebook("ksvd", B, V.mean, V.reference, sparsity=s, provenance=prov), C
    B, C, errs, label_map = lcksvd(X.T, labels, d, s, kappa=kappa, seed=seed, max_iter=max_iter)
    prov.update({"errors": errs, "kappa": kappa})
    return Codebook("lcksvd", B, V.mean, V.reference, sparsity=s, label_map=label_map,
                    provenance=prov), C


def code_row(cb: Codebook, row) -> np.ndarray:
    row = np.asarray(row, float)
    if cb.method == "pca":
        return cb.basis.T @ (row - cb.center)
    return _omp(cb.basis, row[:, None], cb.sparsity)[:, 0]


def encode(cb: Codebook, traj: Trajectory, target=None) -> np.ndarray:
    """Align ``traj`` to the stored mean, take its shooting row and code it."""
    aligned, _ = align_to_mean(cb.mean, cb.reference, traj, target)
    return code_row(cb, shooting_row(cb.mean, aligned))


def encode_many(cb: Codebook, trajs: Sequence[Trajectory], threads: int = 1) -> np.ndarray:
    """Codes of several trajectories as a (d, N) matrix."""
    target = compute_tsrvf(cb.mean, cb.reference)
    cols = _pmap(lambda tr: encode(cb, tr, target), list(trajs), threads)
    return np.stack(cols, axis=1) if cols else np.empty((cb.d, 0))


def decode_row(cb: Codebook, code) -> np.ndarray:
    code = np.asarray(code, float)
    if code.shape != (cb.d,):
        raise ValidationError(f"code must have length {cb.d}")
    row = cb.basis @ code
    return row + cb.center if cb.center is not None else row


def decode(cb: Codebook, code) -> Trajectory:
    return exp_row(cb.mean, decode_row(cb, code))


# --------------------------------------------------------------------------
# principal geodesic analysis baseline: per-frame tangent PCA
# --------------------------------------------------------------------------

@dataclass
class PgaModel:
    manifold: Manifold
    means: np.ndarray  # (T, *point_shape)
    bases: np.ndarray  # (T, coord_dim, d_frame)
    centers: np.ndarray  # (T, coord_dim)

    @property
    def T(self) -> int:
        return len(self.means)

    @property
    def d_frame(self) -> int:
        return self.bases.shape[2]


def pga_fit(trajs: Sequence[Trajectory], d_frame: int):
    """Tangent PCA at the per-frame Karcher mean, frame by frame.

    Returns ``(model, codes)`` with codes of shape (N, T * d_frame).
    """
    if not len(trajs):
        raise ValidationError("pga_fit needs at least one trajectory")
    M, T = trajs[0].manifold, trajs[0].T
    for tr in trajs:
        if tr.manifold != M or tr.T != T:
            raise ValidationError("trajectories must share manifold and sample count")
    stack = np.stack([tr.samples for tr in trajs], axis=1)  # (T, N, ...)
    if not 1 <= d_frame <= M.coord_dim:
        raise RankError(f"d_frame must lie in [1, {M.coord_dim}]")
    means, bases, centers = [], [], []
    for t in range(T):
        mu, _, _ = M.karcher_mean(stack[t], tol=1e-10, max_iter=100)
        X = M.coords(mu, M.log(mu[None], stack[t]))
        B, center, _ = pca_basis(X, d_frame, complete=True)
        means.append(mu)
        bases.append(B)
        centers.append(center)
    model = PgaModel(M, np.stack(means), np.stack(bases), np.stack(centers))
    return model, np.stack([pga_encode(model, tr) for tr in trajs])


def pga_encode(model: PgaModel, traj: Trajectory) -> np.ndarray:
    M = model.manifold
    X = M.coords(model.means, M.log(model.means, traj.samples))
    return np.einsum("tdk,td->tk", model.bases, X - model.centers).reshape(-1)


def pga_decode(model: PgaModel, code) -> Trajectory:
    M = model.manifold
    c = np.asarray(code, float).reshape(model.T, model.d_frame)
    X = np.einsum("tdk,tk->td", model.bases, c) + model.centers
    return Trajectory(M, M.exp(model.means, M.from_coords(model.means, X)))
