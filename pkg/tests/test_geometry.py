import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st

from rtraj.errors import BasePointMismatch, CutLocusError, EmptyInput, InvalidTangent, ValidationError
from rtraj.geometry import (SE3Product, SPD, Euclidean, Grassmann, Tangent, exp_map, geodesic_distance,
                            karcher_mean_points, log_map, manifold_from_dict, parallel_transport,
                            parse_manifold, random_tangent, se3_exp, se3_log, so3_exp, so3_log,
                            validate_point)
from rtraj.geometry.se3 import hat

from conftest import MANIFOLDS, random_points


def series_expm(A, terms=30):
    out = np.eye(len(A))
    term = np.eye(len(A))
    for k in range(1, terms):
        term = term @ A / k
        out = out + term
    return out


def twist_matrix(xi):
    X = np.zeros((4, 4))
    X[:3, :3] = hat(xi[:3])
    X[:3, 3] = xi[3:]
    return X


# --- SE(3) closed forms against a matrix-series oracle -----------------------

@pytest.mark.parametrize("theta", [0.0, 1e-12, 1e-8, 1e-7, 1e-5, 0.3, 1.0, 2.0, 3.0])
def test_se3_exp_matches_series(theta, rng):
    for _ in range(5):
        axis = rng.standard_normal(3)
        xi = np.concatenate([theta * axis / np.linalg.norm(axis), rng.standard_normal(3)])
        assert np.abs(se3_exp(xi) - series_expm(twist_matrix(xi))).max() <= 1e-9


@pytest.mark.parametrize("theta", [1e-12, 1e-8, 1e-7, 1e-5, 0.3, 1.0, 2.0, 3.0])
def test_se3_log_inverts_series(theta, rng):
    for _ in range(5):
        axis = rng.standard_normal(3)
        xi = np.concatenate([theta * axis / np.linalg.norm(axis), rng.standard_normal(3)])
        g = series_expm(twist_matrix(xi))
        assert np.abs(se3_log(g) - xi).max() <= 1e-9


def test_so3_zero_rotation():
    assert np.array_equal(so3_exp(np.zeros(3)), np.eye(3))
    assert np.array_equal(so3_log(np.eye(3)), np.zeros(3))


def test_so3_log_near_pi_recovers_axis():
    axis = np.array([1.0, 2.0, -0.5]) / np.linalg.norm([1.0, 2.0, -0.5])
    w = (np.pi - 1e-4) * axis
    assert np.allclose(so3_log(so3_exp(w)), w, atol=1e-8)


def test_so3_log_cut_locus():
    R = so3_exp(np.array([0.0, 0.0, np.pi]))
    with pytest.raises(CutLocusError):
        so3_log(R)


def test_se3_pure_translation():
    M = SE3Product(1)
    p = M.identity()
    q = p.copy()
    q[0, :3, 3] = [1.0, -2.0, 0.5]
    assert np.allclose(M.log(p, q), [[0, 0, 0, 1.0, -2.0, 0.5]])
    assert np.isclose(M.dist(p, q), np.sqrt(5.25))


# --- SPD and Grassmann against scipy / definitional oracles ------------------

def test_spd_maps_match_scipy(rng):
    M = SPD(3)
    P, Q = random_points(M, 2, rng)
    V = M.log(P, Q)
    Pi = np.linalg.inv(P)
    # log_P(Q) = P logm(sqrtm(P^-1 Q^2 P^-1))
    ref = P @ sla.logm(sla.sqrtm(Pi @ Q @ Q @ Pi)).real
    assert np.allclose(V, ref, atol=1e-10)
    ref_exp = sla.sqrtm(P @ sla.expm(2 * Pi @ V) @ P).real
    assert np.allclose(M.exp(P, V), ref_exp, atol=1e-10)
    assert np.allclose(M.exp(P, V), Q, atol=1e-10)


def test_spd_distance_from_spectrum(rng):
    M = SPD(3)
    P, Q = random_points(M, 2, rng)
    # d(P, Q) depends only on the spectrum of P^-1 Q^2 P^-1
    w = np.linalg.eigvals(np.linalg.inv(P) @ Q @ Q @ np.linalg.inv(P)).real
    assert np.isclose(M.dist(P, Q), 0.5 * np.linalg.norm(np.log(w)), atol=1e-12)
    assert np.isclose(M.dist(P, Q), M.dist(Q, P), atol=1e-12)


def test_grassmann_distance_matches_subspace_angles(rng):
    M = Grassmann(2, 6)
    P, Q = random_points(M, 2, rng, scale=0.8)
    Y1 = np.linalg.eigh(P)[1][:, -2:]
    Y2 = np.linalg.eigh(Q)[1][:, -2:]
    theta = sla.subspace_angles(Y1, Y2)
    assert np.isclose(M.dist(P, Q), np.sqrt(2) * np.linalg.norm(theta), atol=1e-10)


def test_grassmann_exp_is_conjugation(rng):
    M = Grassmann(2, 6)
    P = random_points(M, 1, rng)[0]
    X = M.random_tangent(P, 0.7, rng)
    E = sla.expm(X)
    assert np.allclose(M.exp(P, X), E @ P @ E.T, atol=1e-10)
    assert np.allclose(M.transport(X, P, M.exp(P, X)), E @ X @ E.T, atol=1e-10)


def test_grassmann_orthogonal_subspaces_are_cut_locus():
    M = Grassmann(1, 3)
    P = np.diag([1.0, 0.0, 0.0])
    Q = np.diag([0.0, 1.0, 0.0])
    with pytest.raises(CutLocusError):
        M.log(P, Q)


# --- generic properties -------------------------------------------------------

@pytest.mark.parametrize("name", ["se3", "spd", "grassmann", "euclidean"])
def test_round_trip_and_transport_isometry(name, rng):
    M = MANIFOLDS[name]
    P = random_points(M, 200, rng, scale=0.8)
    Q = random_points(M, 200, rng, scale=0.8)
    V = M.log(P, Q)
    assert np.max(M.dist(M.exp(P, V), Q)) <= 1e-8
    U = M.random_tangent(P, 1.0, rng)
    W = M.random_tangent(P, 1.0, rng)
    drift = np.abs(M.inner(Q, M.transport(U, P, Q), M.transport(W, P, Q)) - M.inner(P, U, W))
    assert drift.max() <= 1e-10


@pytest.mark.parametrize("name", ["se3", "spd", "grassmann"])
def test_transport_carries_velocity_along_geodesic(name, rng):
    M = MANIFOLDS[name]
    P, Q = random_points(M, 2, rng, scale=0.6)
    v = M.log(P, Q)
    assert np.allclose(M.transport(v, P, Q), -M.log(Q, P), atol=1e-9)


@pytest.mark.parametrize("name", ["se3", "spd", "grassmann", "euclidean"])
def test_exp_outputs_are_valid_points(name, rng):
    M = MANIFOLDS[name]
    P = random_points(M, 50, rng, scale=2.0)
    assert max(M.validate(P).values()) <= 1e-9


@pytest.mark.parametrize("name", ["se3", "spd", "grassmann", "euclidean"])
def test_coords_round_trip(name, rng):
    M = MANIFOLDS[name]
    P = random_points(M, 10, rng)
    V = M.random_tangent(P, 1.0, rng)
    x = M.coords(P, V)
    assert x.shape == (10, M.coord_dim)
    assert np.allclose(M.from_coords(P, x), V, atol=1e-12)
    assert np.allclose(np.sum(x * x, axis=-1), M.inner(P, V, V), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(0.0, 1.2))
def test_distance_symmetry_and_log_norm(seed, scale):
    rng = np.random.default_rng(seed)
    for M in (SE3Product(2), SPD(3), Grassmann(2, 4)):
        P, Q = random_points(M, 2, rng, scale=scale)
        d = M.dist(P, Q)
        assert np.isclose(d, M.dist(Q, P), atol=1e-9)
        assert np.isclose(d, M.norm(P, M.log(P, Q)), atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    for M in (SPD(3), Grassmann(2, 5)):
        A, B, C = random_points(M, 3, rng, scale=0.5)
        assert M.dist(A, C) <= M.dist(A, B) + M.dist(B, C) + 1e-9


def test_geodesic_midpoint_is_karcher_mean(rng):
    for M in (SE3Product(2).intrinsic(), SPD(3), Grassmann(2, 5)):
        P, Q = random_points(M, 2, rng, scale=0.6)
        mid = M.exp(P, 0.5 * M.log(P, Q))
        mu = karcher_mean_points(M, np.stack([P, Q]), tol=1e-12)
        assert M.dist(mu, mid) <= 1e-8


def test_euclidean_karcher_is_arithmetic_mean(rng):
    pts = rng.standard_normal((7, 3))
    assert np.allclose(karcher_mean_points(Euclidean(3), pts), pts.mean(0))


def test_se3_extrinsic_mean_is_valid_and_close_to_intrinsic(rng):
    M = SE3Product(3)
    pts = random_points(M, 6, rng, scale=0.2)
    ext = karcher_mean_points(M, pts)
    res = karcher_mean_points(M.intrinsic(), pts, full_output=True)
    assert res.converged
    assert max(M.validate(ext).values()) <= 1e-9
    assert M.dist(ext, res.point) < 0.05


# --- checked wrappers and parsing ---------------------------------------------

def test_parse_manifold():
    assert parse_manifold("se3:15") == SE3Product(15)
    assert parse_manifold("spd:3") == SPD(3)
    assert parse_manifold("grassmann:2,10") == Grassmann(2, 10)
    assert parse_manifold("euclidean:4") == Euclidean(4)
    assert manifold_from_dict({"kind": "spd", "params": {"d": 3}}) == SPD(3)
    for bad in ("torus:2", "spd:", "grassmann:3", "spd:x"):
        with pytest.raises(ValidationError):
            parse_manifold(bad)


def test_invalid_tangent_rejected(rng):
    M = SPD(3)
    P = np.eye(3)
    with pytest.raises(InvalidTangent):
        exp_map(M, P, np.diag([1.0, 0.0, 0.0]))  # not traceless
    with pytest.raises(InvalidTangent):
        exp_map(Grassmann(1, 3), np.diag([1.0, 0, 0]), np.eye(3))


def test_base_point_mismatch(rng):
    M = SPD(3)
    P, Q = random_points(M, 2, rng)
    v = Tangent(P, M.random_tangent(P, 1.0, rng))
    with pytest.raises(BasePointMismatch):
        exp_map(M, Q, v)
    assert np.allclose(exp_map(M, P, v), M.exp(P, v.data))
    assert parallel_transport(M, v, P, Q).shape == (3, 3)


def test_wrappers_and_validation(rng):
    M = SE3Product(2)
    P, Q = random_points(M, 2, rng)
    assert np.isclose(geodesic_distance(M, P, Q), M.norm(P, log_map(M, P, Q)))
    assert max(validate_point(M, P).values()) <= 1e-9
    bad = P.copy()
    bad[0, 0, 0] += 0.1
    assert validate_point(M, bad)["orthogonality"] > 1e-3
    with pytest.raises(EmptyInput):
        karcher_mean_points(M, np.empty((0, 2, 4, 4)))
    with pytest.raises(ValidationError):
        random_tangent(M, P, -1.0)
    v = random_tangent(M, P, 0.5, rng_seed=3)
    assert np.isclose(M.norm(P, v), 0.5)
    assert np.array_equal(v, random_tangent(M, P, 0.5, rng_seed=3))
