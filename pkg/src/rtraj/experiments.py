"""Desk-scale experiment harness.

Synthetic labelled trajectory sets, classification and clustering
evaluations, eigenvalue decay of shooting vectors, and robustness studies
(reference point, sensor noise, sampling rate).
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import LinearRegression
from sklearn.svm import LinearSVC

from .coding import (align_to_mean, encode_many, fit_codebook, pga_encode, pga_fit, shooting_row,
                     shooting_set)
from .elastic import (Trajectory, compute_tsrvf, default_reference, optimal_warp_dp,
                      pointwise_mean, resample, subsequence, trajectory_mean)
from .errors import InvalidK, SplitError, ValidationError
from .geometry import Manifold

PIPELINES = ("unwarped", "tsrvf-nn", "tsrvf-svm", "rfpca", "rfksvd", "rflcksvd", "pga")


@dataclass
class LabeledDataset:
    trajectories: list
    labels: list
    metadata: dict = field(default_factory=dict)
    targets: list | None = None

    def __post_init__(self):
        if len(self.trajectories) != len(self.labels):
            raise ValidationError("one label per trajectory is required")
        if self.targets is not None and len(self.targets) != len(self.labels):
            raise ValidationError("one target per trajectory is required")

    def __len__(self):
        return len(self.trajectories)

    @property
    def manifold(self) -> Manifold:
        return self.trajectories[0].manifold

    @property
    def T(self) -> int:
        return self.trajectories[0].T

    @property
    def classes(self) -> list:
        return sorted(set(self.labels), key=_label_key)

    def subset(self, idx) -> "LabeledDataset":
        idx = list(idx)
        targets = None if self.targets is None else [self.targets[i] for i in idx]
        return LabeledDataset([self.trajectories[i] for i in idx], [self.labels[i] for i in idx],
                              dict(self.metadata), targets)

    def replace(self, trajectories) -> "LabeledDataset":
        return LabeledDataset(list(trajectories), list(self.labels), dict(self.metadata),
                              None if self.targets is None else list(self.targets))


def _label_key(x):
    return (0, x, "") if isinstance(x, (int, np.integer)) else (1, 0, str(x))


@dataclass
class EvalReport:
    method: str
    accuracy: float
    accuracy_std: float
    dimension: int
    split_accuracies: list
    confusion: list
    classes: list
    classifier: str = "nn"
    extra: dict = field(default_factory=dict)
    timing: float = 0.0

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "method": self.method,
            "classifier": self.classifier,
            "accuracy": self.accuracy,
            "accuracy_std": self.accuracy_std,
            "dimension": self.dimension,
            "split_accuracies": list(self.split_accuracies),
            "confusion": [list(map(int, r)) for r in self.confusion],
            "classes": [c if isinstance(c, (int, str)) else str(c) for c in self.classes],
            "extra": self.extra,
        }
        if include_timing:
            out["timing"] = self.timing
        return out


# --------------------------------------------------------------------------
# synthetic data
# --------------------------------------------------------------------------

def smooth_warp(T: int, rng, strength: float = 0.5, n_modes: int = 4) -> np.ndarray:
    """gamma = normalised cumulative integral of exp(b), b a random
    band-limited signal with max |b| up to ``strength``."""
    t = np.linspace(0.0, 1.0, T)
    if strength <= 0:
        return t
    k = np.arange(1, n_modes + 1)
    a = rng.standard_normal(n_modes) / k
    phase = rng.uniform(0, 2 * np.pi, n_modes)
    b = np.sin(np.pi * np.outer(t, k) + phase) @ a
    b *= strength * rng.uniform(0.5, 1.0) / max(np.abs(b).max(), 1e-12)
    w = np.exp(b)
    area = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]))])
    gamma = area / area[-1]
    gamma[-1] = 1.0
    return gamma


def _tangent_modes(M: Manifold, base, n, rng, scale):
    """``n`` random tangent coordinate vectors at ``base`` of norm ``scale``."""
    return np.stack([M.coords(base, M.random_tangent(base, scale, rng)) for _ in range(n)])


def _mode_weights(s, freqs, phases):
    return np.sin(np.outer(s, freqs) * np.pi + phases)


class _Template:
    """A smooth curve s -> exp_base(sum_j w_j(s) v_j), evaluable anywhere in [0, 1]."""

    def __init__(self, M, base, coeffs, freqs, phases):
        self.M, self.base, self.coeffs = M, base, coeffs
        self.freqs, self.phases = freqs, phases

    def __call__(self, s):
        s = np.asarray(s, float)
        x = _mode_weights(s, self.freqs, self.phases) @ self.coeffs
        bases = np.broadcast_to(self.base, (len(s),) + self.base.shape)
        return self.M.exp(bases, self.M.from_coords(bases, x))


def _smooth_noise(M: Manifold, samples, rng, noise, n_modes=3):
    """Displace each sample by a smoothly varying tangent of size <= ``noise``."""
    if noise <= 0:
        return samples
    T = len(samples)
    base = M.identity()
    coeffs = _tangent_modes(M, base, n_modes, rng, 1.0)
    w = _mode_weights(np.linspace(0, 1, T), rng.uniform(0.5, 2.0, n_modes), rng.uniform(0, 2 * np.pi, n_modes))
    x = w @ coeffs
    x *= noise / max(np.linalg.norm(x, axis=1).max(), 1e-12)
    v = M.from_coords(samples, x)
    # re-normalise after projection onto each tangent space
    n0 = np.linalg.norm(x, axis=1)
    n1 = M.norm(samples, v)
    v = v * np.where(n1 > 1e-12, n0 / np.where(n1 > 1e-12, n1, 1.0), 0.0).reshape((-1,) + (1,) * (v.ndim - 1))
    return M.exp(samples, v)


def synth_dataset(manifold: Manifold, k_classes: int, n_per_class: int, T: int,
                  warp_strength: float = 0.5, noise: float = 0.05, seed: int = 0,
                  class_spread: float = 1.0, shared: float = 0.0, n_modes: int = 3,
                  scale: float = 1.0, frequency: float = 1.0) -> LabeledDataset:
    """Class templates are random smooth curves; instances are the template
    evaluated at ``gamma(t)`` for a random warp, plus smooth tangent noise.

    ``shared`` > 0 adds a curve common to every class, with ``class_spread``
    scaling the class-specific part; small spread and strong warps make
    classes differ mainly after alignment.
    """
    if k_classes < 1 or n_per_class < 1:
        raise ValidationError("need at least one class and one instance")
    rng = np.random.default_rng(seed)
    M = manifold
    base = M.identity()
    freqs = frequency * rng.uniform(0.5, 1.5, n_modes)
    common = _tangent_modes(M, base, n_modes, rng, shared * scale)
    templates = []
    for _ in range(k_classes):
        own = _tangent_modes(M, base, n_modes, rng, class_spread * scale)
        templates.append(_Template(M, base, (common + own) / np.sqrt(n_modes), freqs,
                                   rng.uniform(0, 2 * np.pi, n_modes) * (shared == 0)))
    trajs, labels = [], []
    for k, tmpl in enumerate(templates):
        for _ in range(n_per_class):
            gamma = smooth_warp(T, rng, warp_strength)
            samples = _smooth_noise(M, tmpl(gamma), rng, noise)
            trajs.append(Trajectory(M, samples))
            labels.append(k)
    meta = {"generator": "synth", "manifold": str(M), "k_classes": k_classes,
            "n_per_class": n_per_class, "T": T, "warp_strength": warp_strength,
            "noise": noise, "seed": seed, "class_spread": class_spread, "shared": shared,
            "frequency": frequency}
    return LabeledDataset(trajs, labels, meta)


def rate_varied_suite(manifold: Manifold, k_classes: int = 4, n_per_class: int = 8, T: int = 40,
                      seed: int = 0, warp_strength: float = 0.5, noise: float = 0.02,
                      class_spread: float = 0.25, frequency: float = 3.0) -> LabeledDataset:
    """Classes share one template up to a small deviation and are strongly
    re-timed, so frame-by-frame comparison confuses them."""
    ds = synth_dataset(manifold, k_classes, n_per_class, T, warp_strength=warp_strength,
                       noise=noise, seed=seed, class_spread=class_spread, shared=1.0,
                       frequency=frequency)
    ds.metadata["generator"] = "rate_varied"
    return ds


def perturb_trajectory(traj: Trajectory, k_max: float, seed=0) -> Trajectory:
    """Move each sample a U(0, k_max) distance along a random unit tangent."""
    if k_max < 0:
        raise ValidationError("k_max must be non-negative")
    if k_max == 0:
        return Trajectory(traj.manifold, traj.samples.copy())
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    M = traj.manifold
    v = M.random_tangent(traj.samples, 1.0, rng)
    k = rng.uniform(0.0, k_max, traj.T)
    return Trajectory(M, M.exp(traj.samples, v * k.reshape((-1,) + (1,) * len(M.tangent_shape))))


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------

def stratified_splits(labels, n_splits: int = 5, test_fraction: float = 0.4, seed: int = 0):
    """Random per-class train/test partitions as lists of (train, test) indices."""
    labels = list(labels)
    classes = sorted(set(labels), key=_label_key)
    if len(classes) < 2:
        raise ValidationError("classification needs at least two classes")
    if n_splits < 1:
        raise ValidationError("need at least one split")
    members = {c: [i for i, y in enumerate(labels) if y == c] for c in classes}
    for c, idx in members.items():
        if len(idx) < 2:
            raise SplitError(f"class {c!r} has fewer than two instances")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_splits):
        train, test = [], []
        for c in classes:
            idx = np.array(members[c])
            perm = rng.permutation(idx)
            n_test = int(np.clip(round(test_fraction * len(idx)), 1, len(idx) - 1))
            test.extend(perm[:n_test].tolist())
            train.extend(perm[n_test:].tolist())
        out.append((sorted(train), sorted(test)))
    return out


def unwarped_distance(a: Trajectory, b: Trajectory) -> float:
    """L2 distance frame by frame, with no alignment.

    Sequences of different length are compared over ``b``'s frames: ``a`` is
    truncated or padded with its last frame.
    """
    M = a.manifold
    Tb = b.T
    if a.T >= Tb:
        sa = a.samples[:Tb]
    else:
        sa = np.concatenate([a.samples, np.repeat(a.samples[-1:], Tb - a.T, axis=0)])
    d = M.dist(sa, b.samples)
    dt = 1.0 / (Tb - 1)
    d2 = d * d
    return float(np.sqrt(dt * (d2.sum() - 0.5 * (d2[0] + d2[-1]))))


def _nn_predict(D, train_labels):
    return [train_labels[int(np.argmin(row))] for row in D]


def _svm_predict(Xtr, ytr, Xte, seed):
    clf = LinearSVC(C=1.0, loss="hinge", dual=True, tol=1e-4, max_iter=1000, random_state=seed)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        clf.fit(Xtr, ytr)
    converged = not any(issubclass(w.category, ConvergenceWarning) for w in caught)
    return list(clf.predict(Xte)), converged


def _euclid(A, B):
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    sq = np.sum(A * A, 1)[:, None] + np.sum(B * B, 1)[None, :] - 2 * A @ B.T
    return np.sqrt(np.maximum(sq, 0.0))


class _DistanceCache:
    """Lazily filled rate-invariant distances from test to train trajectories."""

    def __init__(self, trajs, c, refine):
        self.h = [compute_tsrvf(tr, c) for tr in trajs]
        self.refine = refine
        self.D = np.full((len(trajs), len(trajs)), np.nan)

    def rows(self, test, train):
        out = np.empty((len(test), len(train)))
        for a, i in enumerate(test):
            for b, j in enumerate(train):
                if np.isnan(self.D[i, j]):
                    self.D[i, j] = optimal_warp_dp(self.h[i], self.h[j], refine=self.refine)[1]
                out[a, b] = self.D[i, j]
        return out


def _prepare_test(trajs, T):
    """Bring re-recorded test trajectories back onto the common grid."""
    return [tr if tr.T == T else resample(tr, T) for tr in trajs]


def evaluate_classification(ds: LabeledDataset, pipeline: str = "tsrvf-nn", splits: int = 5,
                            seed: int = 0, classifier: str | None = None, d: int = 10,
                            s: int = 3, d_frame: int = 2, test_fraction: float = 0.4,
                            test_trajectories: Sequence[Trajectory] | None = None,
                            refine: int = 16, max_iter: int = 20, cache=None) -> EvalReport:
    """Average accuracy of one pipeline over stratified random splits.

    ``test_trajectories`` optionally replaces every trajectory when it is used
    as a test item (for re-recorded or perturbed test sets).
    """
    pipeline = pipeline.lower()
    if pipeline not in PIPELINES:
        raise ValidationError(f"unknown pipeline {pipeline!r}; choose from {PIPELINES}")
    if classifier is None:
        classifier = "svm" if pipeline == "tsrvf-svm" else "nn"
    if classifier not in ("nn", "svm"):
        raise ValidationError("classifier must be 'nn' or 'svm'")
    if pipeline == "tsrvf-svm" and classifier != "svm":
        raise ValidationError("tsrvf-svm is an SVM pipeline")
    start = time.perf_counter()
    parts = stratified_splits(ds.labels, splits, test_fraction, seed)
    classes = ds.classes
    cidx = {c: i for i, c in enumerate(classes)}
    trajs = ds.trajectories
    tests = list(trajs) if test_trajectories is None else list(test_trajectories)
    if len(tests) != len(trajs):
        raise ValidationError("need one test trajectory per dataset item")
    T = ds.T
    M = ds.manifold
    accs, conf = [], np.zeros((len(classes), len(classes)), dtype=int)
    dim = None
    extra = {}
    if pipeline == "tsrvf-nn" and classifier == "nn":
        c = default_reference(M, trajs)
        test_grid = _prepare_test(tests, T)
        if cache is None:
            cache = _DistanceCache(list(test_grid) + list(trajs), c, refine)
        n = len(trajs)
    for k, (train, test) in enumerate(parts):
        ytr = [ds.labels[i] for i in train]
        yte = [ds.labels[i] for i in test]
        train_set = [trajs[i] for i in train]
        test_set = [tests[i] for i in test]
        if pipeline == "unwarped":
            if classifier == "nn":
                Dm = np.array([[unwarped_distance(a, b) for b in train_set] for a in test_set])
                pred = _nn_predict(Dm, ytr)
                dim = T * M.coord_dim
            else:
                mu = pointwise_mean(train_set)
                Xtr = np.stack([shooting_row(mu, a) for a in train_set])
                Xte = np.stack([shooting_row(mu, a) for a in _prepare_test(test_set, T)])
                pred, ok = _svm_predict(Xtr, ytr, Xte, seed)
                extra.setdefault("svm_converged", []).append(ok)
                dim = Xtr.shape[1]
        elif pipeline == "tsrvf-nn" and classifier == "nn":
            Dm = cache.rows(test, [n + j for j in train])
            pred = _nn_predict(Dm, ytr)
            dim = T * M.coord_dim
        elif pipeline == "pga":
            model, Xtr = pga_fit(train_set, d_frame)
            Xte = np.stack([pga_encode(model, a) for a in _prepare_test(test_set, T)])
            dim = Xtr.shape[1]
            if classifier == "nn":
                pred = _nn_predict(_euclid(Xte, Xtr), ytr)
            else:
                pred, ok = _svm_predict(Xtr, ytr, Xte, seed)
                extra.setdefault("svm_converged", []).append(ok)
        else:
            S = shooting_set(train_set, max_iter=max_iter, refine=refine)
            if pipeline in ("tsrvf-nn", "tsrvf-svm"):
                Xtr = S.vectors
                target = compute_tsrvf(S.mean, S.reference)
                Xte = np.stack([shooting_row(S.mean, align_to_mean(S.mean, S.reference, a, target,
                                                                   refine=refine)[0])
                                for a in _prepare_test(test_set, T)])
            else:
                method = {"rfpca": "pca", "rfksvd": "ksvd", "rflcksvd": "lcksvd"}[pipeline]
                kw = {} if method == "pca" else {"s": s}
                if method == "lcksvd":
                    kw["labels"] = ytr
                cb, C = fit_codebook(S, method, d=min(d, len(train_set), S.D - 1), seed=seed, **kw)
                Xtr = C.T
                Xte = encode_many(cb, _prepare_test(test_set, T)).T
            dim = Xtr.shape[1]
            if classifier == "nn":
                pred = _nn_predict(_euclid(Xte, Xtr), ytr)
            else:
                pred, ok = _svm_predict(Xtr, ytr, Xte, seed)
                extra.setdefault("svm_converged", []).append(ok)
        accs.append(float(np.mean([p == y for p, y in zip(pred, yte)])))
        for p, y in zip(pred, yte):
            conf[cidx[y], cidx[p]] += 1
    return EvalReport(method=pipeline, accuracy=float(np.mean(accs)), accuracy_std=float(np.std(accs)),
                      dimension=int(dim), split_accuracies=accs, confusion=conf.tolist(),
                      classes=classes, classifier=classifier, extra=extra,
                      timing=time.perf_counter() - start)


def evaluate_regression(ds: LabeledDataset, pipeline: str = "rfpca", splits: int = 5, seed: int = 0,
                        d: int = 10, test_fraction: float = 0.4, refine: int = 16,
                        max_iter: int = 20) -> dict:
    """Linear regression of scalar targets on trajectory codes.

    Reports the Pearson correlation between predicted and true held-out
    targets, averaged over random splits.
    """
    if ds.targets is None:
        raise ValidationError("dataset has no regression targets")
    if pipeline not in ("rfpca", "tsrvf-svm", "unwarped"):
        raise ValidationError("regression supports rfpca, tsrvf-svm (raw shooting vectors) and unwarped")
    n = len(ds)
    rng = np.random.default_rng(seed)
    y = np.asarray(ds.targets, float)
    cors, dim = [], None
    for _ in range(splits):
        perm = rng.permutation(n)
        n_test = int(np.clip(round(test_fraction * n), 2, n - 2))
        test, train = sorted(perm[:n_test]), sorted(perm[n_test:])
        tr = [ds.trajectories[i] for i in train]
        te = [ds.trajectories[i] for i in test]
        if pipeline == "unwarped":
            mu = pointwise_mean(tr)
            Xtr = np.stack([shooting_row(mu, a) for a in tr])
            Xte = np.stack([shooting_row(mu, a) for a in te])
        else:
            S = shooting_set(tr, max_iter=max_iter, refine=refine)
            if pipeline == "rfpca":
                cb, C = fit_codebook(S, "pca", d=min(d, len(tr), S.D - 1))
                Xtr, Xte = C.T, encode_many(cb, te).T
            else:
                target = compute_tsrvf(S.mean, S.reference)
                Xtr = S.vectors
                Xte = np.stack([shooting_row(S.mean, align_to_mean(S.mean, S.reference, a, target)[0])
                                for a in te])
        model = LinearRegression().fit(Xtr, y[train])
        pred = model.predict(Xte)
        yt = y[test]
        if np.std(pred) == 0 or np.std(yt) == 0:
            cors.append(0.0)
        else:
            cors.append(float(np.corrcoef(pred, yt)[0, 1]))
        dim = Xtr.shape[1]
    return {"method": pipeline, "correlation": float(np.mean(cors)),
            "correlation_std": float(np.std(cors)), "split_correlations": cors, "dimension": int(dim)}


# --------------------------------------------------------------------------
# clustering and spectra
# --------------------------------------------------------------------------

@dataclass
class KMedoidsResult:
    assignments: np.ndarray
    medoids: np.ndarray
    cost: float
    cost_trace: list


def _as_distances(X, precomputed):
    X = np.asarray(X, float)
    if precomputed:
        if X.ndim != 2 or X.shape[0] != X.shape[1]:
            raise ValidationError("a precomputed distance matrix must be square")
        return X
    if X.ndim != 2:
        raise ValidationError("codes must be an (N, d) matrix")
    return _euclid(X, X)


def kmedoids_cluster(X, k: int, seed: int = 0, precomputed: bool = False,
                     max_iter: int = 300) -> KMedoidsResult:
    """Partitioning around medoids: greedy BUILD, then best-improvement SWAP
    until no swap lowers the total distance. ``seed`` breaks ties in BUILD."""
    D = _as_distances(X, precomputed)
    N = len(D)
    if not 1 <= k <= N:
        raise InvalidK(f"k={k} must lie in [1, {N}]")
    rng = np.random.default_rng(seed)
    jitter = rng.permutation(N)  # tie-break order
    medoids = []
    nearest = np.full(N, np.inf)
    for _ in range(k):
        cand = [j for j in range(N) if j not in medoids]
        gains = np.array([np.sum(np.minimum(nearest, D[:, j])) for j in cand])
        best = np.flatnonzero(gains == gains.min())
        pick = min((cand[b] for b in best), key=lambda j: jitter[j])
        medoids.append(pick)
        nearest = np.minimum(nearest, D[:, pick])
    medoids = np.array(medoids)

    def total(meds):
        return float(np.sum(np.min(D[:, meds], axis=1)))

    cost = total(medoids)
    trace = [cost]
    for _ in range(max_iter):
        best_cost, best_swap = cost, None
        for a in range(k):
            for h in range(N):
                if h in medoids:
                    continue
                trial = medoids.copy()
                trial[a] = h
                c = total(trial)
                if c < best_cost - 1e-12 * max(1.0, abs(best_cost)):
                    best_cost, best_swap = c, (a, h)
        if best_swap is None:
            break
        medoids[best_swap[0]] = best_swap[1]
        cost = best_cost
        trace.append(cost)
    assign = np.argmin(D[:, medoids], axis=1)
    return KMedoidsResult(assignments=assign, medoids=medoids, cost=cost, cost_trace=trace)


@dataclass
class EigenDecay:
    eigenvalues: np.ndarray
    cumulative: np.ndarray
    knee: int  # number of dominant eigenvalues
    n90: int  # smallest count reaching 90% of the variance

    def to_dict(self):
        return {"eigenvalues": self.eigenvalues.tolist(), "cumulative": self.cumulative.tolist(),
                "knee": self.knee, "n90": self.n90}


def eigen_decay(V, rel_tol: float = 1e-10) -> EigenDecay:
    """Spectrum of the centred row covariance of the shooting vectors.

    ``knee`` is the count before the largest ratio between consecutive
    non-negligible eigenvalues.
    """
    X = np.asarray(getattr(V, "vectors", V), float)
    if X.ndim != 2 or len(X) < 2:
        raise ValidationError("eigen_decay needs at least two rows")
    Xc = X - X.mean(0)
    s = np.linalg.svd(Xc, compute_uv=False)
    vals = np.sort(s**2 / (len(X) - 1))[::-1]
    total = vals.sum()
    cum = np.cumsum(vals) / total if total > 0 else np.ones_like(vals)
    big = vals[vals > rel_tol * max(vals[0], 1e-300)] if total > 0 else vals[:0]
    if len(big) >= 2:
        ratios = big[:-1] / big[1:]
        knee = int(np.argmax(ratios)) + 1
    else:
        knee = len(big)
    n90 = int(np.searchsorted(cum, 0.9 - 1e-12) + 1) if total > 0 else 0
    return EigenDecay(vals, cum, knee, n90)


# --------------------------------------------------------------------------
# robustness studies
# --------------------------------------------------------------------------

def data_diameter(trajs: Sequence[Trajectory], max_points: int = 400, seed: int = 0) -> float:
    """Largest geodesic distance between samples (on a seeded subsample)."""
    pts = np.concatenate([tr.samples for tr in trajs])
    if len(pts) > max_points:
        pts = pts[np.random.default_rng(seed).choice(len(pts), max_points, replace=False)]
    M = trajs[0].manifold
    best = 0.0
    for i in range(len(pts) - 1):
        best = max(best, float(np.max(M.dist(pts[i][None], pts[i + 1:]))))
    return best


def adversarial_reference(trajs: Sequence[Trajectory], factor: float = 5.0, seed: int = 0,
                          attempts: int = 50):
    """A reference point at geodesic distance ``factor`` data diameters from
    a random data sample.

    Among ``attempts`` random directions the candidate farthest from every
    sample is kept, provided every sample can still reach it without
    crossing the cut locus. On compact manifolds the target distance may be
    unreachable; it then shrinks by 10% after each round without a valid
    candidate. Returns ``(point, actual_distance)``.
    """
    M = trajs[0].manifold
    rng = np.random.default_rng(seed)
    pts = np.concatenate([tr.samples for tr in trajs])
    dist = factor * max(data_diameter(trajs, seed=seed), 1e-6)
    for _ in range(60):
        best, best_gap = None, -np.inf
        for _ in range(attempts):
            p = pts[rng.integers(len(pts))]
            c = M.exp(p, M.random_tangent(p, dist, rng))
            reached = float(M.dist(p, c))
            if reached < dist * (1 - 1e-6):
                continue  # the geodesic wrapped around
            if max(M.validate(c).values()) > 1e-6:
                continue
            try:
                with np.errstate(all="ignore"):
                    logs = M.log(c[None], pts)
                    moved = M.transport(M.zero_tangent(pts), pts, c[None])
            except ArithmeticError:
                continue
            if not (np.all(np.isfinite(logs)) and np.all(np.isfinite(moved))):
                continue
            with np.errstate(all="ignore"):
                gap = float(np.min(M.dist(c[None], pts)))
            if not np.isfinite(gap):
                continue
            if gap > best_gap:
                best, best_gap = (c, reached), gap
        if best is not None:
            return best
        dist *= 0.9
    raise ValidationError("could not place a reference point off the cut locus")


def _pad_trace(trace, n):
    return list(trace) + [trace[-1]] * (n - len(trace))


def reference_stability(trajs: Sequence[Trajectory], c_good=None, c_bad=None, iters: int = 80,
                        factor: float = 5.0, seed: int = 0, repeats: int = 10, tol: float = 1e-6,
                        refine: int = 16) -> dict:
    """Registration-error traces of the elastic mean under the default
    reference and under adversarial ones.

    Without an explicit ``c_bad``, ``repeats`` adversarial references are
    drawn (seeds ``seed, seed + 1, ...``) and their traces averaged, with
    each trace held at its final value once it stops.
    """
    if len(trajs) < 2:
        raise ValidationError("reference_stability needs at least two trajectories")
    M = trajs[0].manifold
    c_good = default_reference(M, trajs) if c_good is None else c_good
    good = trajectory_mean(trajs, c=c_good, tol=tol, max_iter=iters, refine=refine)
    refs = [(c_bad, None)] if c_bad is not None else \
        [adversarial_reference(trajs, factor, seed + r) for r in range(repeats)]
    bad = [trajectory_mean(trajs, c=c, tol=tol, max_iter=iters, refine=refine) for c, _ in refs]
    n = max(len(r.error_trace) for r in bad)
    bad_mean = np.mean([_pad_trace(r.error_trace, n) for r in bad], axis=0)
    g_final = good.error_trace[-1]
    return {
        "good": {"error_trace": list(good.error_trace), "converged": good.converged,
                 "iterations": good.iterations},
        "bad": [{"error_trace": list(r.error_trace), "converged": r.converged,
                 "iterations": r.iterations, "reference_distance": dist}
                for r, (_, dist) in zip(bad, refs)],
        "bad_mean_trace": bad_mean.tolist(),
        "good_final": g_final,
        "bad_final": float(bad_mean[-1]),
        "ratio": float(bad_mean[-1] / g_final) if g_final > 0 else float("inf"),
        "diameter": data_diameter(trajs, seed=seed),
    }


def sampling_study(ds: LabeledDataset, factors=(0.5, 1.0, 2.0), pipelines=("tsrvf-nn", "unwarped"),
                   mode: str = "rate", splits: int = 5, seed: int = 0, **kwargs) -> dict:
    """Re-record the test trajectories at ``round(factor * T)`` frames and
    re-evaluate.

    ``mode="rate"`` resamples the whole motion (frame-rate change);
    ``mode="endpoint"`` keeps the first ``factor * T`` frames (factors <= 1).
    Pipelines built on the warp-invariant representation re-grid test
    trajectories onto [0, 1]; the unwarped baseline consumes frames as
    recorded.
    """
    for f in factors:
        if not 0.25 <= f <= 4:
            raise ValidationError("factors must lie in [0.25, 4]")
        if mode == "endpoint" and f > 1:
            raise ValidationError("endpoint truncation needs factors <= 1")
    if mode not in ("rate", "endpoint"):
        raise ValidationError("mode must be 'rate' or 'endpoint'")
    T = ds.T
    out = {}
    for f in factors:
        Tn = max(2, int(round(f * T)))
        if mode == "rate":
            tests = [resample(tr, Tn) for tr in ds.trajectories]
        else:
            tests = [subsequence(tr, Tn) for tr in ds.trajectories]
        out[f] = {p: evaluate_classification(ds, p, splits=splits, seed=seed, test_trajectories=tests,
                                             **kwargs) for p in pipelines}
    return out


def noise_study(ds: LabeledDataset, k_values=(0.0, 0.25, 0.5), pipelines=("rfpca", "tsrvf-nn", "unwarped"),
                splits: int = 5, seed: int = 0, **kwargs) -> dict:
    """Perturb every trajectory with sensor-style noise of level k, then evaluate."""
    out = {}
    for j, k in enumerate(k_values):
        noisy = ds.replace([perturb_trajectory(tr, k, seed=[seed, j, i])
                            for i, tr in enumerate(ds.trajectories)])
        out[k] = {p: evaluate_classification(noisy, p, splits=splits, seed=seed, **kwargs)
                  for p in pipelines}
    return out


def accuracy_spread(results: dict, pipeline: str) -> float:
    accs = [r[pipeline].accuracy for r in results.values()]
    return float(max(accs) - min(accs))


__all__ = [
    "LabeledDataset", "EvalReport", "PIPELINES", "smooth_warp", "synth_dataset", "rate_varied_suite",
    "perturb_trajectory", "stratified_splits", "unwarped_distance", "evaluate_classification",
    "evaluate_regression", "kmedoids_cluster", "KMedoidsResult", "eigen_decay", "EigenDecay",
    "data_diameter", "adversarial_reference", "reference_stability", "sampling_study",
    "noise_study", "accuracy_spread",
]
