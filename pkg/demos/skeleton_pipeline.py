"""Synthetic skeleton walk to LARP features, elastic mean and a PCA codebook."""
import numpy as np

from rtraj.coding import decode, encode, fit_codebook, shooting_set
from rtraj.features import SKELETON_15, SkeletonSequence, larp_from_skeleton


def fake_sequence(rng, T=30, phase=0.0):
    J = 15
    base = rng.standard_normal((J, 3))
    t = np.linspace(0, 1, T)
    pos = np.zeros((T, J, 3))
    for a, b in SKELETON_15:
        swing = 0.2 * np.sin(2 * np.pi * (t + phase))[:, None]
        pos[:, b] = pos[:, a] + 0.3 * base[b] + swing * np.array([1.0, 0.0, 0.0])
    return SkeletonSequence(pos, SKELETON_15)


def main():
    rng = np.random.default_rng(0)
    trajs = [larp_from_skeleton(fake_sequence(rng, phase=0.1 * i)) for i in range(6)]
    print(f"feature dimension D = {trajs[0].T * trajs[0].manifold.coord_dim}")
    S = shooting_set(trajs, max_iter=5)
    M = trajs[0].manifold
    spread = np.max(M.dist(S.mean.samples, S.aligned[0].samples))
    print(f"worst frame distance from the mean {spread:.3f}")
    for d in range(1, len(trajs)):
        cb, _ = fit_codebook(S, "pca", d=d, seed=0)
        rec = decode(cb, encode(cb, trajs[0]))
        gap = np.max(M.dist(rec.samples, S.aligned[0].samples))
        print(f"d={d} worst frame gap after coding {gap:.3g}")

if __name__ == "__main__":
    main()
