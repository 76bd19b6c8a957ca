import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rtraj.elastic import (DEFAULT_STEPS, Trajectory, Tsrvf, compute_tsrvf, default_reference,
                           edge_costs, gamma_compose, gamma_inverse, identity_warp, lattice_dp,
                           optimal_warp_dp, path_energy, random_warp, rate_invariant_distance,
                           registration_error, resample, subsequence, trajectory_mean,
                           tsrvf_distance, tsrvf_norm, warp_trajectory, warp_tsrvf)
from rtraj.errors import CutLocusError, EmptyInput, NotInvertible, ReferenceMismatch, ValidationError
from rtraj.geometry import SE3Product, SPD, Euclidean, Grassmann

from conftest import TRAJ_MANIFOLDS, random_points, smooth_curve

IDS = [str(M) for M in TRAJ_MANIFOLDS]


def geodesic(M, p, v, times):
    times = np.asarray(times, float)
    return Trajectory(M, M.exp(np.broadcast_to(p, (len(times),) + p.shape),
                               times.reshape((-1,) + (1,) * v.ndim) * v))


def all_lattice_paths(T, steps):
    out = []

    def walk(node, acc):
        if node == (T - 1, T - 1):
            out.append(list(acc))
            return
        for di, dj in steps:
            nxt = (node[0] + di, node[1] + dj)
            if nxt[0] < T and nxt[1] < T:
                acc.append(nxt)
                walk(nxt, acc)
                acc.pop()

    walk((0, 0), [(0, 0)])
    return out


# --- TSRVF ----------------------------------------------------------------------

@pytest.mark.parametrize("M", TRAJ_MANIFOLDS, ids=IDS)
def test_constant_trajectory_has_zero_tsrvf(M, rng):
    p = random_points(M, 1, rng)[0]
    h = compute_tsrvf(Trajectory(M, np.stack([p] * 20)), default_reference(M))
    assert np.array_equal(h.field, np.zeros_like(h.field))


def test_euclidean_tsrvf_is_srvf(rng):
    M = Euclidean(2)
    t = np.linspace(0, 1, 40)
    x = np.stack([np.sin(3 * t), t**2 + t], axis=1)
    h = compute_tsrvf(Trajectory(M, x), np.zeros(2))
    v = np.gradient(x, t, axis=0, edge_order=1)
    ref = v / np.sqrt(np.linalg.norm(v, axis=1))[:, None]
    assert np.allclose(h.field, ref, atol=1e-12)


@pytest.mark.parametrize("M", TRAJ_MANIFOLDS, ids=IDS)
def test_uniform_geodesic_tsrvf_norm(M, rng):
    T = 50
    p = random_points(M, 1, rng, scale=0.5)[0]
    speed = 0.8
    v = M.random_tangent(p, speed, rng)
    traj = geodesic(M, p, v, np.linspace(0, 1, T))
    h = compute_tsrvf(traj, default_reference(M, [traj]))
    norms = M.norm(h.reference, h.field)
    assert np.abs(norms[1:-1] - np.sqrt(speed)).max() <= 2.0 / T


def test_cut_locus_reports_index():
    M = Grassmann(1, 2)
    angles = np.linspace(0.0, 1.2, 5)
    pts = np.array([np.outer([np.cos(a), np.sin(a)], [np.cos(a), np.sin(a)]) for a in angles])
    far = np.array([[0.0, 0.0], [0.0, 1.0]])
    with pytest.raises(CutLocusError) as info:
        compute_tsrvf(Trajectory(M, pts), far)
    assert info.value.index is not None


def test_trajectory_validation():
    with pytest.raises(ValidationError):
        Trajectory(SPD(3), np.eye(3)[None])
    with pytest.raises(ValidationError):
        Trajectory(SPD(3), np.zeros((4, 2, 2)))


# --- TSRVF distance -------------------------------------------------------------

def test_tsrvf_distance_basics(rng):
    M = SE3Product(2)
    a, b = smooth_curve(M, 30, rng), smooth_curve(M, 30, rng)
    c = M.identity()
    ha, hb = compute_tsrvf(a, c), compute_tsrvf(b, c)
    assert tsrvf_distance(ha, ha) == 0.0
    zero = Tsrvf(M, c, np.zeros_like(ha.field))
    assert np.isclose(tsrvf_distance(ha, zero), tsrvf_norm(ha))
    assert np.isclose(tsrvf_distance(ha, hb), tsrvf_distance(hb, ha))
    hc = compute_tsrvf(smooth_curve(M, 30, rng), c)
    assert tsrvf_distance(ha, hc) <= tsrvf_distance(ha, hb) + tsrvf_distance(hb, hc) + 1e-12


def test_tsrvf_distance_reference_mismatch(rng):
    M = SPD(3)
    a = smooth_curve(M, 10, rng)
    other = random_points(M, 1, rng)[0]
    with pytest.raises(ReferenceMismatch):
        tsrvf_distance(compute_tsrvf(a, M.identity()), compute_tsrvf(a, other))


def test_trapezoid_quadrature_is_second_order():
    # Integrate |f|^2 for f(t) = (sin 2t, cos 3t); the trapezoid error shrinks
    # like 1/T^2, checked against a Richardson-extrapolated reference.
    M = Euclidean(2)

    def d(T):
        t = np.linspace(0, 1, T)
        h = Tsrvf(M, np.zeros(2), np.stack([np.sin(2 * t), np.cos(3 * t)], axis=1))
        return tsrvf_norm(h) ** 2

    ref = (4 * d(401) - d(201)) / 3
    e1, e2 = abs(d(51) - ref), abs(d(101) - ref)
    assert e1 / e2 == pytest.approx(4.0, rel=0.05)
    t = (np.arange(200) + 0.5) / 200
    midpoint = np.mean(np.sin(2 * t) ** 2 + np.cos(3 * t) ** 2)
    assert abs(d(201) - midpoint) <= 10.0 / 200**2


# --- warps -----------------------------------------------------------------------

@pytest.mark.parametrize("M", TRAJ_MANIFOLDS, ids=IDS)
def test_identity_warp_is_noop(M, rng):
    a = smooth_curve(M, 25, rng)
    assert np.array_equal(warp_trajectory(a, identity_warp(25)).samples, a.samples)
    h = compute_tsrvf(a, default_reference(M, [a]))
    assert np.allclose(warp_tsrvf(h, identity_warp(25)).field, h.field, atol=1e-12)


@pytest.mark.parametrize("M", TRAJ_MANIFOLDS, ids=IDS)
def test_constant_trajectory_is_warp_invariant(M, rng):
    p = random_points(M, 1, rng)[0]
    a = Trajectory(M, np.stack([p] * 30))
    b = warp_trajectory(a, random_warp(30, rng))
    assert np.allclose(b.samples, a.samples, atol=1e-12)


@pytest.mark.parametrize("M", TRAJ_MANIFOLDS, ids=IDS)
def test_warp_round_trip(M, rng):
    T = 100
    a = smooth_curve(M, T, rng)
    g = random_warp(T, rng)
    back = warp_trajectory(warp_trajectory(a, g), gamma_inverse(g))
    assert np.max(M.dist(back.samples, a.samples)) <= 2.0 / T


@pytest.mark.parametrize("M", TRAJ_MANIFOLDS, ids=IDS)
def test_warp_tsrvf_preserves_norm_and_matches_trajectory_warp(M, rng):
    T = 100
    a = smooth_curve(M, T, rng)
    g = random_warp(T, rng)
    c = default_reference(M, [a])
    h = compute_tsrvf(a, c)
    hw = warp_tsrvf(h, g)
    assert abs(tsrvf_norm(hw) - tsrvf_norm(h)) <= 0.02 * tsrvf_norm(h)
    direct = compute_tsrvf(warp_trajectory(a, g), c)
    assert tsrvf_distance(direct, hw) <= 0.05 * tsrvf_norm(h)


def test_gamma_group_operations(rng):
    T = 101
    t = identity_warp(T)
    assert np.array_equal(gamma_compose(t, t), t)
    g = random_warp(T, rng)
    assert np.allclose(gamma_compose(g, t), g)
    assert np.abs(gamma_compose(g, gamma_inverse(g)) - t).max() <= 1.0 / T
    assert np.abs(gamma_inverse(t**2) - np.sqrt(t)).max() <= 1.0 / T
    g2, g3 = random_warp(T, rng), random_warp(T, rng)
    lhs = gamma_compose(gamma_compose(g, g2), g3)
    rhs = gamma_compose(g, gamma_compose(g2, g3))
    assert np.abs(lhs - rhs).max() <= 2.0 / T


def test_gamma_inverse_rejects_flat_segments():
    g = np.array([0.0, 0.3, 0.3, 0.7, 1.0])
    with pytest.raises(NotInvertible):
        gamma_inverse(g)
    with pytest.raises(ValidationError):
        gamma_compose(np.array([0.0, 0.6, 0.4, 1.0]), identity_warp(4))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), T=st.integers(5, 200), strength=st.floats(0.0, 0.95))
def test_random_warps_are_valid_diffeomorphisms(seed, T, strength):
    g = random_warp(T, np.random.default_rng(seed), strength)
    assert g[0] == 0.0 and g[-1] == 1.0
    assert np.all(np.diff(g) > 0)
    inv = gamma_inverse(g)
    assert inv[0] == 0.0 and inv[-1] == 1.0 and np.all(np.diff(inv) >= 0)


# --- dynamic programming -----------------------------------------------------------

@pytest.mark.parametrize("M", TRAJ_MANIFOLDS + [Euclidean(3)], ids=IDS + ["euclidean"])
def test_dp_matches_brute_force(M, rng):
    for T in (5, 6, 7):
        paths = all_lattice_paths(T, DEFAULT_STEPS)
        for _ in range(3):
            a, b = smooth_curve(M, T, rng), smooth_curve(M, T, rng)
            c = default_reference(M, [a, b])
            x1, x2 = compute_tsrvf(a, c).coords(), compute_tsrvf(b, c).coords()
            E = edge_costs(x1, x2)
            best = min(path_energy(E, p) for p in paths)
            nodes, energy = lattice_dp(x1, x2)
            assert energy == best
            assert path_energy(E, [tuple(n) for n in nodes]) == energy


def test_edge_cost_matches_direct_integral(rng):
    # A (2, 1) edge: gamma has slope 1/2 and x2 is read half-way between samples.
    T = 6
    x1, x2 = rng.standard_normal((T, 3)), rng.standard_normal((T, 3))
    E = edge_costs(x1, x2)
    dt = 1 / (T - 1)
    i, j = 1, 2
    f = [np.sum((x1[i] - np.sqrt(0.5) * x2[j]) ** 2),
         np.sum((x1[i + 1] - np.sqrt(0.5) * 0.5 * (x2[j] + x2[j + 1])) ** 2),
         np.sum((x1[i + 2] - np.sqrt(0.5) * x2[j + 1]) ** 2)]
    assert np.isclose(E[(2, 1)][i, j], dt * (0.5 * f[0] + f[1] + 0.5 * f[2]))


@pytest.mark.parametrize("M", TRAJ_MANIFOLDS, ids=IDS)
def test_dp_identical_inputs(M, rng):
    a = smooth_curve(M, 40, rng)
    h = compute_tsrvf(a, default_reference(M, [a]))
    g, cost = optimal_warp_dp(h, h)
    assert np.array_equal(g, identity_warp(40))
    assert cost == 0.0


@pytest.mark.parametrize("M", TRAJ_MANIFOLDS, ids=IDS)
def test_dp_recovers_known_warp(M, rng):
    T = 100
    a = smooth_curve(M, T, rng)
    h = compute_tsrvf(a, default_reference(M, [a]))
    g = random_warp(T, rng)
    g_star, cost = optimal_warp_dp(h, warp_tsrvf(h, g))
    assert np.abs(gamma_compose(g, g_star) - identity_warp(T)).max() <= 2.0 / T
    assert cost <= 0.02 * tsrvf_norm(h)


@pytest.mark.parametrize("M", TRAJ_MANIFOLDS, ids=IDS)
def test_dp_cost_is_distance_after_warp(M, rng):
    a, b = smooth_curve(M, 60, rng), smooth_curve(M, 60, rng)
    c = default_reference(M, [a, b])
    ha, hb = compute_tsrvf(a, c), compute_tsrvf(b, c)
    for refine in (0, 16):
        g, cost = optimal_warp_dp(ha, hb, refine=refine)
        assert np.isclose(cost, tsrvf_distance(ha, warp_tsrvf(hb, g)))
        assert cost <= tsrvf_distance(ha, hb) + 1e-12


def test_refinement_never_hurts(rng):
    M = SE3Product(3)
    for _ in range(5):
        a, b = smooth_curve(M, 80, rng), smooth_curve(M, 80, rng)
        ha, hb = compute_tsrvf(a, M.identity()), compute_tsrvf(b, M.identity())
        assert optimal_warp_dp(ha, hb)[1] <= optimal_warp_dp(ha, hb, refine=0)[1] + 1e-12


# --- rate-invariant distance --------------------------------------------------------

@pytest.mark.parametrize("M", TRAJ_MANIFOLDS, ids=IDS)
def test_rate_invariant_distance_properties(M, rng):
    T = 100
    a = smooth_curve(M, T, rng)
    c = default_reference(M, [a])
    assert rate_invariant_distance(a, a, c) == 0.0
    norm = max(tsrvf_norm(compute_tsrvf(a, c)), 1.0)
    for _ in range(3):
        b = warp_trajectory(a, random_warp(T, rng))
        assert rate_invariant_distance(a, b, c) <= 0.02 * norm
    other = smooth_curve(M, T, rng)
    d1, d2 = rate_invariant_distance(a, other, c), rate_invariant_distance(other, a, c)
    assert abs(d1 - d2) <= 0.05 * max(d1, d2)


@pytest.mark.parametrize("M", TRAJ_MANIFOLDS, ids=IDS)
@pytest.mark.parametrize("T,tol", [(100, 0.05), (400, 0.01)])
def test_tsrvf_distance_is_warp_invariant(M, T, tol, rng):
    c = M.identity()
    for _ in range(3):
        h1 = compute_tsrvf(smooth_curve(M, T, rng), c)
        h2 = compute_tsrvf(smooth_curve(M, T, rng), c)
        g = random_warp(T, rng)
        d = tsrvf_distance(h1, h2)
        assert abs(d - tsrvf_distance(warp_tsrvf(h1, g), warp_tsrvf(h2, g))) <= tol * d


def test_per_joint_warping(rng):
    M = SE3Product(2)
    T = 60
    a = smooth_curve(M, T, rng)
    g1, g2 = random_warp(T, rng), random_warp(T, rng)
    b = a.samples.copy()
    b[:, 0] = warp_trajectory(Trajectory(SE3Product(1), a.samples[:, :1]), g1).samples[:, 0]
    b[:, 1] = warp_trajectory(Trajectory(SE3Product(1), a.samples[:, 1:]), g2).samples[:, 0]
    b = Trajectory(M, b)
    c = M.identity()
    joint = rate_invariant_distance(a, b, c, per_component=True)
    shared = rate_invariant_distance(a, b, c)
    assert joint < shared
    with pytest.raises(ValidationError):
        rate_invariant_distance(smooth_curve(SPD(3), 10, rng), smooth_curve(SPD(3), 10, rng),
                                per_component=True)


# --- Karcher mean of trajectories ----------------------------------------------------

def test_mean_of_single_trajectory(rng):
    M = SE3Product(2)
    a = smooth_curve(M, 30, rng)
    res = trajectory_mean([a])
    assert np.allclose(res.mean.samples, a.samples, atol=1e-12)
    assert np.array_equal(res.warps[0], identity_warp(30))


@pytest.mark.parametrize("M", TRAJ_MANIFOLDS, ids=IDS)
def test_mean_of_warped_copies(M, rng):
    T = 50
    a = smooth_curve(M, T, rng)
    trajs = [warp_trajectory(a, random_warp(T, rng)) for _ in range(5)]
    res = trajectory_mean(trajs)
    assert res.converged
    assert res.error_trace[-1] <= 0.01 * res.error_trace[0]
    assert len(res.aligned) == 5 and res.warps.shape == (5, T)
    assert np.all(np.diff(res.error_trace[1:]) <= 0)


def test_mean_of_two_geodesics_with_opposite_speed_profiles(rng):
    M = SE3Product(2)
    p = M.identity()
    v = M.random_tangent(p, 1.0, rng)
    t = np.linspace(0, 1, 60)
    trajs = [geodesic(M, p, v, t**2), geodesic(M, p, v, np.sqrt(t))]
    res = trajectory_mean(trajs)
    trace = np.array(res.error_trace)
    assert trace[-1] < 0.1 * trace[0]
    assert np.all(np.diff(trace) < 0)
    assert res.converged


def test_mean_threads_give_same_answer(rng):
    M = SPD(3)
    a = smooth_curve(M, 30, rng)
    trajs = [warp_trajectory(a, random_warp(30, rng)) for _ in range(4)]
    r1 = trajectory_mean(trajs, max_iter=3)
    r2 = trajectory_mean(trajs, max_iter=3, threads=3)
    assert np.array_equal(r1.mean.samples, r2.mean.samples)
    assert r1.error_trace == r2.error_trace


def test_mean_rejects_bad_input(rng):
    with pytest.raises(EmptyInput):
        trajectory_mean([])
    with pytest.raises(ValidationError):
        trajectory_mean([smooth_curve(SPD(3), 10, rng), smooth_curve(SPD(3), 12, rng)])


def test_registration_error(rng):
    M = SE3Product(1)
    mu = smooth_curve(M, 20, rng)
    assert registration_error(mu, [mu, mu]) == 0.0
    # constant offset of r along a translation direction at every sample
    r = 0.3
    shift = np.eye(4)
    shift[0, 3] = r
    moved = Trajectory(M, mu.samples @ shift)
    assert np.isclose(registration_error(mu, [moved]), 20 * r * r)
    others = [smooth_curve(M, 20, rng) for _ in range(3)]
    assert np.isclose(registration_error(mu, others), registration_error(mu, others[::-1]))


# --- resampling ----------------------------------------------------------------------

@pytest.mark.parametrize("M", TRAJ_MANIFOLDS, ids=IDS)
def test_resample_and_subsequence(M, rng):
    a = smooth_curve(M, 100, rng)
    assert np.abs(resample(a, 100).samples - a.samples).max() <= 1e-12
    assert np.array_equal(subsequence(a, 100).samples, a.samples)
    assert subsequence(a, 40).T == 40
    p = random_points(M, 1, rng, scale=0.5)[0]
    geo = geodesic(M, p, M.random_tangent(p, 0.9, rng), np.linspace(0, 1, 100))
    back = resample(resample(geo, 50), 100)
    assert np.max(M.dist(back.samples, geo.samples)) <= 1e-8
    with pytest.raises(ValidationError):
        resample(a, 1)
    with pytest.raises(ValidationError):
        subsequence(a, 101)


def test_default_reference():
    assert np.array_equal(default_reference(SE3Product(2)), SE3Product(2).identity())
    assert np.array_equal(default_reference(SPD(3)), np.eye(3))
    assert np.array_equal(default_reference(Euclidean(3)), np.zeros(3))
    M = Grassmann(1, 2)
    ang = [0.1, 0.3]
    trajs = [Trajectory(M, np.stack([np.outer([np.cos(x), np.sin(x)], [np.cos(x), np.sin(x)])] * 3))
             for x in ang]
    c = default_reference(M, trajs)
    ref = np.outer([np.cos(0.2), np.sin(0.2)], [np.cos(0.2), np.sin(0.2)])
    assert np.allclose(c, ref, atol=1e-9)
    assert not list(itertools.chain(trajs[0].validate()))
