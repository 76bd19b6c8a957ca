"""Classify rate-varied Grassmann trajectories with and without elastic alignment."""
from rtraj.experiments import evaluate_classification, rate_varied_suite
from rtraj.geometry import Grassmann


def main():
    ds = rate_varied_suite(Grassmann(2, 6), k_classes=4, n_per_class=8, T=40, seed=0)
    for pipeline in ("unwarped", "tsrvf-nn", "rfpca", "pga"):
        rep = evaluate_classification(ds, pipeline, splits=3, seed=0, d=8)
        print(f"{pipeline:10s} accuracy {rep.accuracy:.3f} +/- {rep.accuracy_std:.3f}  dim {rep.dimension}")


if __name__ == "__main__":
    main()
