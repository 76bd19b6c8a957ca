"""Rate-invariant comparison and averaging of manifold-valued trajectories.

A trajectory is sampled on the uniform grid ``t_i = i / (T - 1)``. Its TSRVF
is the velocity field scaled by ``1/sqrt(|velocity|)`` and parallel
transported to a common reference point ``c``; the L2 distance between
TSRVFs is unchanged when both trajectories are re-timed by the same warp,
which is what makes the quotient distance below well defined.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (CutLocusError, EmptyInput, NotInvertible, NumericalError, ReferenceMismatch,
                     ValidationError)
from .geometry import Grassmann, Manifold, SE3Product

# |velocity| below this is treated as a stop (zero TSRVF).
ZERO_SPEED = 1e-10

# DP predecessor steps (di, dj) on the T x T grid. (1, 1) comes first so that
# ties resolve to the diagonal.
DEFAULT_STEPS = ((1, 1), (1, 2), (2, 1), (1, 3), (3, 1))


@dataclass
class Trajectory:
    manifold: Manifold
    samples: np.ndarray  # (T, *point_shape)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        shape = self.manifold.point_shape
        if self.samples.ndim != 1 + len(shape) or self.samples.shape[1:] != shape:
            raise ValidationError(
                f"samples of shape {self.samples.shape} do not match {self.manifold} points {shape}")
        if len(self.samples) < 2:
            raise ValidationError("a trajectory needs T >= 2 samples")

    @property
    def T(self) -> int:
        return len(self.samples)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.T)

    def __len__(self):
        return self.T

    def validate(self, tol: float = 1e-9) -> list[int]:
        """Indices of samples violating the point invariants."""
        return [i for i, p in enumerate(self.samples) if self.manifold.max_violation(p) > tol]


@dataclass
class Tsrvf:
    manifold: Manifold
    reference: np.ndarray
    field: np.ndarray  # (T, *tangent_shape), all at ``reference``

    @property
    def T(self) -> int:
        return len(self.field)

    def coords(self) -> np.ndarray:
        """(T, D) coordinates whose dot products are the metric at ``reference``."""
        return self.manifold.coords(self.reference, self.field)


@dataclass
class MeanResult:
    mean: Trajectory
    aligned: list
    warps: np.ndarray  # (N, T), or (N, n, T) with per-component warping
    error_trace: list
    converged: bool
    reference: np.ndarray
    iterations: int = 0
    initial_mean: Trajectory | None = field(default=None, repr=False)


def _check_same(trajs: Sequence[Trajectory]):
    if len(trajs) == 0:
        raise EmptyInput("need at least one trajectory")
    M, T = trajs[0].manifold, trajs[0].T
    for tr in trajs[1:]:
        if tr.manifold != M or tr.T != T:
            raise ValidationError("trajectories must share manifold and sample count")
    return M, T


def identity_warp(T: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, T)


def random_warp(T: int, rng, strength: float = 0.5, n_terms: int = 3) -> np.ndarray:
    """Smooth random warp: a convex mix of the identity and scaled sigmoids.

    ``strength`` in [0, 1) is the weight on the sigmoid part, so the slope
    stays above ``1 - strength``.
    """
    if not 0.0 <= strength < 1.0:
        raise ValidationError("strength must lie in [0, 1)")
    t = identity_warp(T)
    centres = rng.uniform(0.15, 0.85, n_terms)
    widths = rng.uniform(0.08, 0.25, n_terms)
    weights = rng.dirichlet(np.ones(n_terms))
    bump = np.zeros(T)
    for c, w, a in zip(centres, widths, weights):
        s = 1.0 / (1.0 + np.exp(-(t - c) / w))
        bump += a * (s - s[0]) / (s[-1] - s[0])
    gamma = (1.0 - strength) * t + strength * bump
    gamma[0], gamma[-1] = 0.0, 1.0
    return gamma


def validate_warp(gamma, tol: float = 1e-12) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=float)
    if gamma.ndim != 1 or len(gamma) < 2:
        raise ValidationError("a warping function needs at least two samples")
    if abs(gamma[0]) > tol or abs(gamma[-1] - 1.0) > tol:
        raise ValidationError("warping functions must satisfy gamma(0)=0 and gamma(1)=1")
    if np.any(np.diff(gamma) < -tol) or gamma.min() < -tol or gamma.max() > 1 + tol:
        raise ValidationError("warping functions must be non-decreasing within [0, 1]")
    return gamma


def default_reference(manifold: Manifold, trajs: Sequence[Trajectory] = ()) -> np.ndarray:
    """Identity for SE3Product / SPD, origin for R^n, and the Karcher mean of
    the first frames for Grassmann."""
    if isinstance(manifold, Grassmann) and len(trajs):
        first = np.stack([tr.samples[0] for tr in trajs])
        mu, _, _ = manifold.karcher_mean(first, tol=1e-12, max_iter=200)
        return mu
    return manifold.identity()


def velocity(traj: Trajectory) -> np.ndarray:
    """Tangent-space finite differences: central inside, one-sided at the ends."""
    M, a = traj.manifold, traj.samples
    dt = 1.0 / (traj.T - 1)
    fwd = M.log(a[:-1], a[1:])   # at a[i], i < T-1
    bwd = M.log(a[1:], a[:-1])   # at a[i], i > 0
    v = np.empty((traj.T,) + M.tangent_shape)
    v[0] = fwd[0] / dt
    v[-1] = -bwd[-1] / dt
    v[1:-1] = (fwd[1:] - bwd[:-1]) / (2.0 * dt)
    return v


def compute_tsrvf(traj: Trajectory, c=None) -> Tsrvf:
    M = traj.manifold
    c = default_reference(M, [traj]) if c is None else np.asarray(c, dtype=float)
    v = velocity(traj)
    speed = M.norm(traj.samples, v)
    try:
        moved = M.transport(v, traj.samples, c[None])
    except CutLocusError as exc:
        raise CutLocusError(f"cannot transport velocity to the reference: {exc}", index=exc.index) from exc
    moving = speed >= ZERO_SPEED
    scale = np.where(moving, 1.0 / np.sqrt(np.where(moving, speed, 1.0)), 0.0)
    h = moved * scale.reshape((-1,) + (1,) * len(M.tangent_shape))
    if not np.all(np.isfinite(h)):
        raise NumericalError("TSRVF has non-finite values; the reference is numerically out of reach")
    return Tsrvf(M, c, h)


def _trapezoid(values, dt):
    return dt * (np.sum(values) - 0.5 * (values[0] + values[-1]))


def _check_pair(h1: Tsrvf, h2: Tsrvf):
    if h1.manifold != h2.manifold or h1.T != h2.T:
        raise ValidationError("TSRVFs must share manifold and length")
    if np.max(np.abs(h1.reference - h2.reference)) > 1e-9:
        raise ReferenceMismatch("TSRVFs live at different reference points")


def tsrvf_distance(h1: Tsrvf, h2: Tsrvf) -> float:
    _check_pair(h1, h2)
    diff = h1.coords() - h2.coords()
    return float(np.sqrt(max(_trapezoid(np.sum(diff * diff, axis=1), 1.0 / (h1.T - 1)), 0.0)))


def tsrvf_norm(h: Tsrvf) -> float:
    x = h.coords()
    return float(np.sqrt(_trapezoid(np.sum(x * x, axis=1), 1.0 / (h.T - 1))))


def _snap(pos):
    # grid times scaled by T - 1 land a few ulps off the integers
    r = np.rint(pos)
    return np.where(np.abs(pos - r) < 1e-9, r, pos)


def _slope(gamma):
    """gamma' by finite differences, in index units so the identity gives 1."""
    return np.maximum(np.gradient(_snap(np.asarray(gamma) * (len(gamma) - 1))), 0.0)


def _interp_rows(x, pos):
    """Linear interpolation of the rows of ``x`` at fractional indices ``pos``."""
    T = len(x)
    pos = _snap(pos)
    j = np.clip(np.floor(pos).astype(int), 0, T - 2)
    a = (pos - j).reshape((-1,) + (1,) * (x.ndim - 1))
    return (1.0 - a) * x[j] + a * x[j + 1]


def evaluate(traj: Trajectory, times) -> np.ndarray:
    """Samples of ``traj`` at arbitrary times in [0, 1] by geodesic interpolation."""
    M, a = traj.manifold, traj.samples
    pos = _snap(np.clip(np.asarray(times, dtype=float), 0.0, 1.0) * (traj.T - 1))
    j = np.minimum(np.floor(pos).astype(int), traj.T - 1)
    frac = pos - j
    out = a[j].copy()
    inner = frac > 0
    if np.any(inner):
        ji = j[inner]
        step = M.log(a[ji], a[ji + 1])
        step *= frac[inner].reshape((-1,) + (1,) * len(M.tangent_shape))
        out[inner] = M.exp(a[ji], step)
    return out


def warp_trajectory(traj: Trajectory, gamma) -> Trajectory:
    gamma = validate_warp(gamma)
    return Trajectory(traj.manifold, evaluate(traj, gamma))


def warp_tsrvf(h: Tsrvf, gamma) -> Tsrvf:
    """``(h o gamma) * sqrt(gamma')`` with gamma' from finite differences."""
    gamma = validate_warp(gamma)
    if len(gamma) != h.T:
        raise ValidationError("warp and TSRVF lengths differ")
    flat = h.field.reshape(h.T, -1)
    moved = _interp_rows(flat, gamma * (h.T - 1))
    slope = _slope(gamma)
    out = (moved * np.sqrt(slope)[:, None]).reshape(h.field.shape)
    return Tsrvf(h.manifold, h.reference, out)


def gamma_compose(g1, g2) -> np.ndarray:
    """``g1 o g2`` sampled on the grid of ``g2``."""
    g1 = validate_warp(g1)
    g2 = validate_warp(g2)
    return np.interp(g2, identity_warp(len(g1)), g1)


def gamma_inverse(gamma) -> np.ndarray:
    gamma = validate_warp(gamma)
    if np.any(np.diff(gamma) <= 0):
        raise NotInvertible("warp has flat segments and cannot be inverted")
    t = identity_warp(len(gamma))
    return np.interp(t, gamma, t)


# --------------------------------------------------------------------------
# dynamic programming
# --------------------------------------------------------------------------

def edge_costs(x1, x2, steps=DEFAULT_STEPS) -> dict:
    """Energy of every admissible grid edge.

    ``x1``, ``x2`` are (T, D) TSRVF coordinates. The entry ``E[(di, dj)][i, j]``
    is the trapezoid-rule integral of ``|x1(t) - sqrt(m) x2(gamma(t))|^2`` over
    the segment from node (i, j) to (i + di, j + dj), where gamma is linear
    with slope ``m = dj / di`` and ``x2`` is interpolated linearly.
    """
    x1 = np.asarray(x1, float)
    x2 = np.asarray(x2, float)
    T = len(x1)
    dt = 1.0 / (T - 1)
    C = x1 @ x2.T
    n1 = np.einsum("ij,ij->i", x1, x1)
    g0 = np.einsum("ij,ij->i", x2, x2)
    g1 = np.einsum("ij,ij->i", x2[:-1], x2[1:])
    g1 = np.append(g1, 0.0)
    out = {}
    for di, dj in steps:
        ni, nj = T - di, T - dj
        if ni <= 0 or nj <= 0:
            out[(di, dj)] = np.empty((max(ni, 0), max(nj, 0)))
            continue
        m = dj / di
        rm = np.sqrt(m)
        total = np.zeros((ni, nj))
        for s in range(di + 1):
            q, r = divmod(s * dj, di)
            a = r / di
            rows = slice(s, s + ni)
            cols = slice(q, q + nj)
            if a == 0.0:
                sq2 = g0[cols]
                cross = C[rows, cols]
            else:
                cols1 = slice(q + 1, q + 1 + nj)
                sq2 = (1 - a) ** 2 * g0[cols] + 2 * a * (1 - a) * g1[cols] + a * a * g0[cols1]
                cross = (1 - a) * C[rows, cols] + a * C[rows, cols1]
            f = n1[rows, None] + m * sq2[None, :] - 2.0 * rm * cross
            w = 0.5 if s in (0, di) else 1.0
            total += w * np.maximum(f, 0.0)
        out[(di, dj)] = dt * total
    return out


def _dp_table(E, T, steps):
    D = np.full((T, T), np.inf)
    back = np.full((T, T), -1, dtype=int)
    D[0, 0] = 0.0
    for i in range(1, T):
        best = np.full(T, np.inf)
        arg = np.full(T, -1, dtype=int)
        for k, (di, dj) in enumerate(steps):
            if di > i or dj >= T:
                continue
            cand = D[i - di, : T - dj] + E[(di, dj)][i - di, :]
            better = cand < best[dj:]
            best[dj:] = np.where(better, cand, best[dj:])
            arg[dj:] = np.where(better, k, arg[dj:])
        D[i] = best
        back[i] = arg
    return D, back


def _backtrack(back, T, steps):
    i = j = T - 1
    nodes = [(i, j)]
    while (i, j) != (0, 0):
        k = back[i, j]
        if k < 0:
            raise ValidationError("no admissible warping path for this step set")
        di, dj = steps[k]
        i, j = i - di, j - dj
        nodes.append((i, j))
    nodes.reverse()
    return np.array(nodes, dtype=float)


def lattice_dp(x1, x2, steps=DEFAULT_STEPS):
    """Minimum-energy monotone path through the T x T grid.

    Returns ``(nodes, energy)`` where ``nodes`` is a (L, 2) integer array of
    grid points from (0, 0) to (T-1, T-1) and ``energy`` is the left-to-right
    sum of ``edge_costs`` along it.
    """
    x1 = np.asarray(x1, float)
    x2 = np.asarray(x2, float)
    T = len(x1)
    steps = tuple(tuple(int(a) for a in s) for s in steps)
    E = edge_costs(x1, x2, steps)
    D, back = _dp_table(E, T, steps)
    if not np.isfinite(D[-1, -1]):
        raise ValidationError("no admissible warping path for this step set")
    return _backtrack(back, T, steps).astype(int), float(D[-1, -1])


def _nodes_to_warp(nodes, T):
    gamma = np.interp(np.arange(T), nodes[:, 0], nodes[:, 1]) / (T - 1)
    gamma[0], gamma[-1] = 0.0, 1.0
    return gamma


def _refine(x1, x2, coarse, K, band, smin, smax):
    """Re-solve on a grid with K sub-steps per interval along the second
    axis, restricted to ``band`` coarse cells around ``coarse``.

    Each row advances by d/K intervals, d in [smin K, smax K], and the edge
    energy is the endpoint trapezoid of ``|x1 - sqrt(slope) x2(gamma)|^2``.
    """
    T = len(x1)
    dt = 1.0 / (T - 1)
    F = K * (T - 1) + 1
    X2 = _interp_rows(x2, np.arange(F) / K)
    n1 = np.einsum("ij,ij->i", x1, x1)
    n2 = np.einsum("ij,ij->i", X2, X2)
    C = x1 @ X2.T
    ds = np.arange(max(1, int(np.ceil(smin * K))), int(np.floor(smax * K)) + 1)
    rm = np.sqrt(ds / K)[:, None]
    centre = np.rint(coarse * (F - 1)).astype(int)
    lo = np.clip(centre - band * K, 0, F - 1)
    hi = np.clip(centre + band * K, 0, F - 1)
    lo[0] = hi[0] = 0
    lo[-1] = hi[-1] = F - 1
    D_prev = np.zeros(1)
    rows_back = [None]

    def cost(i, cols, r):
        return n1[i] + r * r * n2[cols] - 2.0 * r * C[i, cols]

    for i in range(1, T):
        J = np.arange(lo[i], hi[i] + 1)
        P = J[None, :] - ds[:, None]
        k = P - lo[i - 1]
        ok = (k >= 0) & (k <= hi[i - 1] - lo[i - 1])
        kc = np.clip(k, 0, hi[i - 1] - lo[i - 1])
        Pc = lo[i - 1] + kc
        f0 = np.maximum(cost(i - 1, Pc, rm), 0.0)
        f1 = np.maximum(cost(i, J[None, :], rm), 0.0)
        cand = np.where(ok, D_prev[kc] + 0.5 * dt * (f0 + f1), np.inf)
        arg = np.argmin(cand, axis=0)
        D_prev = cand[arg, np.arange(len(J))]
        rows_back.append(ds[arg])
    if not np.isfinite(D_prev[-1]):
        return None
    j = F - 1
    path = [j]
    for i in range(T - 1, 0, -1):
        j -= rows_back[i][j - lo[i]]
        path.append(j)
    gamma = np.array(path[::-1], float) / (F - 1)
    gamma[0], gamma[-1] = 0.0, 1.0
    return gamma


def optimal_warp_dp(h1: Tsrvf, h2: Tsrvf, steps=DEFAULT_STEPS, refine: int = 16, band: int = 4):
    """Warp gamma minimising ``d_h(h1, (h2 o gamma) sqrt(gamma'))``.

    The T x T lattice path is found first. With ``refine`` > 1 it is then
    polished on a grid ``refine`` times finer along the second axis inside a
    band of ``band`` cells, which removes most of the error caused by the few
    slopes a lattice path can take. Returns ``(gamma, cost)`` where ``cost``
    is ``d_h(h1, warp_tsrvf(h2, gamma))``; the identity warp is kept if it is
    no worse.
    """
    _check_pair(h1, h2)
    return _warp_coords(h1.coords(), h2.coords(), steps, refine, band)


def _warp_cost(x1, x2, gamma):
    T = len(x1)
    moved = _interp_rows(x2, gamma * (T - 1))
    slope = _slope(gamma)
    diff = x1 - moved * np.sqrt(slope)[:, None]
    return float(np.sqrt(max(_trapezoid(np.sum(diff * diff, axis=1), 1.0 / (T - 1)), 0.0)))


def _warp_coords(x1, x2, steps=DEFAULT_STEPS, refine=16, band=4):
    T = len(x1)
    nodes, _ = lattice_dp(x1, x2, steps)
    candidates = [identity_warp(T), _nodes_to_warp(nodes, T)]
    if refine and refine > 1:
        slopes = [dj / di for di, dj in steps]
        fine = _refine(x1, x2, candidates[1], int(refine), int(band), min(slopes), max(slopes))
        if fine is not None:
            candidates.append(fine)
    costs = [_warp_cost(x1, x2, g) for g in candidates]
    best = int(np.argmin(costs))  # ties favour the identity
    return candidates[best], costs[best]


def path_energy(E, nodes) -> float:
    """Left-to-right sum of edge energies along a node path."""
    total = 0.0
    for (i0, j0), (i1, j1) in zip(nodes[:-1], nodes[1:]):
        total = total + E[(i1 - i0, j1 - j0)][i0, j0]
    return total


def rate_invariant_distance(a1: Trajectory, a2: Trajectory, c=None, steps=DEFAULT_STEPS,
                            per_component: bool = False, refine: int = 16, band: int = 4) -> float:
    """Distance between the warp orbits of two trajectories.

    Only the second argument is warped; the first stays on the identity warp.
    """
    M, _ = _check_same([a1, a2])
    c = default_reference(M, [a1, a2]) if c is None else c
    h1, h2 = compute_tsrvf(a1, c), compute_tsrvf(a2, c)
    if per_component:
        _, costs = _componentwise_dp(h1, h2, steps, refine, band)
        return float(np.sqrt(np.sum(np.square(costs))))
    return optimal_warp_dp(h1, h2, steps, refine, band)[1]


def _componentwise_dp(h1: Tsrvf, h2: Tsrvf, steps, refine=16, band=4):
    if not isinstance(h1.manifold, SE3Product):
        raise ValidationError("per-component warping is only defined on SE3Product")
    x1 = h1.field  # (T, n, 6)
    x2 = h2.field
    warps, costs = [], []
    for comp in range(h1.manifold.n):
        g, cost = _warp_coords(x1[:, comp], x2[:, comp], steps, refine, band)
        warps.append(g)
        costs.append(cost)
    return np.array(warps), np.array(costs)


def _warp_components(traj: Trajectory, warps) -> Trajectory:
    out = np.empty_like(traj.samples)
    for comp, g in enumerate(warps):
        sub = Trajectory(SE3Product(1), traj.samples[:, comp:comp + 1])
        out[:, comp] = evaluate(sub, g)[:, 0]
    return Trajectory(traj.manifold, out)


def align(target: Tsrvf, traj: Trajectory, h=None, steps=DEFAULT_STEPS, per_component=False,
          refine: int = 16, band: int = 4):
    """Warp ``traj`` onto the TSRVF ``target``; returns (aligned, gamma)."""
    h = compute_tsrvf(traj, target.reference) if h is None else h
    if per_component:
        warps, _ = _componentwise_dp(target, h, steps, refine, band)
        return _warp_components(traj, warps), warps
    gamma, _ = optimal_warp_dp(target, h, steps, refine, band)
    return Trajectory(traj.manifold, evaluate(traj, gamma)), gamma


def pointwise_mean(trajs: Sequence[Trajectory]) -> Trajectory:
    M, _ = _check_same(trajs)
    stack = np.stack([tr.samples for tr in trajs])
    mu, _, _ = M.karcher_mean(stack, tol=1e-10, max_iter=100)
    return Trajectory(M, mu)


def registration_error(mu: Trajectory, trajs: Sequence[Trajectory]) -> float:
    """Sum over trajectories and samples of squared geodesic distance to ``mu``."""
    M = mu.manifold
    if not len(trajs):
        return 0.0
    stack = np.stack([tr.samples for tr in trajs])
    d = M.dist(mu.samples[None], stack)
    same = np.all((stack == mu.samples[None]).reshape(stack.shape[:2] + (-1,)), axis=-1)
    d = np.where(same, 0.0, d)
    return float(np.sum(d * d))


def _pmap(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def trajectory_mean(trajs: Sequence[Trajectory], c=None, tol: float = 1e-6, max_iter: int = 50,
                    steps=DEFAULT_STEPS, per_component: bool = False, threads: int = 1,
                    refine: int = 16, band: int = 4) -> MeanResult:
    """Karcher mean of trajectories with simultaneous alignment.

    Each iteration warps every input onto the current mean by dynamic
    programming, records the registration error, then replaces the mean by
    the cross-sectional mean of the aligned set. Stops when the relative
    error decrease falls below ``tol``; an increase reverts to the previous
    state so the recorded trace never rises after its first entry.
    """
    M, T = _check_same(trajs)
    c = default_reference(M, trajs) if c is None else np.asarray(c, dtype=float)
    hs = _pmap(lambda tr: compute_tsrvf(tr, c), trajs, threads)
    mu = pointwise_mean(trajs)
    initial = mu
    trace = [registration_error(mu, trajs)]
    state = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        target = compute_tsrvf(mu, c)
        pairs = _pmap(lambda ih: align(target, trajs[ih[0]], ih[1], steps, per_component,
                                             refine, band),
                      list(enumerate(hs)), threads)
        aligned = [p[0] for p in pairs]
        warps = np.array([p[1] for p in pairs])
        err = registration_error(mu, aligned)
        if state is not None and err > trace[-1]:
            converged = True
            it -= 1
            break
        prev = trace[-1]
        trace.append(err)
        state = (mu, aligned, warps)
        if err == 0.0 or (len(trace) > 2 and prev - err <= tol * prev):
            converged = True
            break
        mu = pointwise_mean(aligned)
    mu, aligned, warps = state
    return MeanResult(mean=mu, aligned=aligned, warps=warps, error_trace=trace,
                      converged=converged, reference=c, iterations=it, initial_mean=initial)


def resample(traj: Trajectory, T_new: int) -> Trajectory:
    if T_new < 2:
        raise ValidationError("resample needs T' >= 2")
    if T_new == traj.T:
        return Trajectory(traj.manifold, traj.samples.copy())
    return Trajectory(traj.manifold, evaluate(traj, identity_warp(T_new)))


def subsequence(traj: Trajectory, T_new: int) -> Trajectory:
    """First ``T_new`` samples, re-read on a fresh uniform grid."""
    if not 2 <= T_new <= traj.T:
        raise ValidationError("subsequence needs 2 <= T' <= T")
    return Trajectory(traj.manifold, traj.samples[:T_new].copy())


__all__ = [
    "Trajectory", "Tsrvf", "MeanResult", "identity_warp", "random_warp", "validate_warp", "default_reference",
    "velocity", "compute_tsrvf", "tsrvf_distance", "tsrvf_norm", "evaluate", "warp_trajectory",
    "warp_tsrvf", "gamma_compose", "gamma_inverse", "edge_costs", "lattice_dp", "optimal_warp_dp",
    "path_energy", "rate_invariant_distance", "align", "pointwise_mean", "registration_error",
    "trajectory_mean", "resample", "subsequence", "DEFAULT_STEPS",
]
