"""Accuracy when test trajectories are re-recorded at other frame counts."""
from rtraj.experiments import rate_varied_suite, sampling_study
from rtraj.geometry import SPD


def main():
    ds = rate_varied_suite(SPD(2), k_classes=3, n_per_class=6, T=30, seed=2)
    out = sampling_study(ds, factors=(0.5, 1.0, 2.0), pipelines=("tsrvf-nn", "unwarped"), splits=2)
    for factor, reports in out.items():
        line = "  ".join(f"{name} {rep.accuracy:.3f}" for name, rep in reports.items())
        print(f"factor {factor:<4} {line}")


if __name__ == "__main__":
    main()
