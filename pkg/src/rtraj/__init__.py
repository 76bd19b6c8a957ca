"""Rate-invariant analysis, averaging and coding of trajectories on Riemannian manifolds."""

__version__ = "0.1.0"

from .coding import (Codebook, ShootingSet, decode, encode, encode_many, fit_codebook, pga_fit,
                     shooting_set)
from .elastic import (MeanResult, Trajectory, Tsrvf, align, compute_tsrvf, default_reference,
                      optimal_warp_dp, rate_invariant_distance, registration_error, resample,
                      subsequence, trajectory_mean, tsrvf_distance, warp_trajectory)
from .errors import (NumericalError, ParseError, RtrajError, ValidationError, VersionError)
from .experiments import (EvalReport, LabeledDataset, evaluate_classification, kmedoids_cluster,
                          synth_dataset)
from .features import (SkeletonSequence, covariance_trajectory, larp_from_skeleton, shape_trajectory)
from .geometry import SE3Product, SPD, Euclidean, Grassmann, parse_manifold
from .io import load_model, read_dataset, save_model, write_dataset
