import numpy as np
import pytest

from rtraj.elastic import Trajectory
from rtraj.geometry import SE3Product, SPD, Euclidean, Grassmann

MANIFOLDS = {
    "se3": SE3Product(5),
    "spd": SPD(3),
    "grassmann": Grassmann(2, 10),
    "euclidean": Euclidean(4),
}

# Small manifolds for trajectory-level tests.
TRAJ_MANIFOLDS = [SE3Product(3), SPD(3), Grassmann(2, 5)]


def random_points(M, n, rng, scale=1.0):
    if isinstance(M, Euclidean):
        return rng.standard_normal((n, M.dim)) * scale
    base = M.identity()
    return M.exp(base[None], M.random_tangent(base[None].repeat(n, 0), scale, rng))


def smooth_curve(M, T, rng, n_modes=3, scale=1.0, base=None):
    """exp_base of a smooth random tangent curve, sampled on [0, 1]."""
    base = M.identity() if base is None else base
    t = np.linspace(0.0, 1.0, T)
    modes = [M.random_tangent(base, 1.0, rng) for _ in range(n_modes)]
    phases = rng.uniform(0, 2 * np.pi, n_modes)
    weights = np.array([[np.sin((j + 1) * 2.0 * ti + phases[j]) for j in range(n_modes)] for ti in t])
    v = np.tensordot(weights, np.stack(modes), axes=1) * (scale / n_modes)
    return Trajectory(M, M.exp(np.broadcast_to(base, (T,) + base.shape), v))


def sigmoid_warp(T, rng, strength=0.5):
    from rtraj.elastic import random_warp
    return random_warp(T, rng, strength=strength)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.acceptance_lines = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
