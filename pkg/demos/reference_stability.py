"""Registration error of the elastic mean under a default and a far-away reference.

The effect shows on compact manifolds such as the Grassmannian; on SPD the
gap is small and on SE(3) the reference plays no role.
"""
from rtraj.experiments import synth_dataset, reference_stability
from rtraj.geometry import Grassmann


def main():
    ds = synth_dataset(Grassmann(2, 6), 1, 10, 40, noise=0.0, seed=0, scale=0.5)
    out = reference_stability(ds.trajectories, iters=80, repeats=10, seed=0)
    print(f"data diameter {out['diameter']:.3f}")
    print(f"default final error {out['good_final']:.4f} after {out['good']['iterations']} iterations")
    print(f"adversarial final error {out['bad_final']:.4f} (ratio {out['ratio']:.2f})")


if __name__ == "__main__":
    main()
