"""Flow-matching action policies on Euclidean and spherical state spaces.

Train a conditional vector field that carries a base distribution onto
demonstrated action horizons, then execute it as a receding-horizon policy
by integrating the field, with trajectory metrics for evaluation.
"""

from .manifolds import Euclidean, Sphere
from .paths import PathSample, flow_matching_loss, sample_gaussian_path, sample_geodesic_path
from .net import MLP, AdamEma, tangent_head
from .solvers import Dopri5, GeodesicEuler, integrate_flow, trace_flow
from .data import (Dataset, Demonstration, Normalization, ObservationVector,
                   TrainingPair, load_csv, load_dataset, normalize,
                   project_to_sphere, sample_training_pair, save_dataset,
                   split_dataset, synthesize_letter)
from .policy import PolicyConfig, TrainedPolicy, infer_action, rollout, train
from .metrics import MetricReport, dtwd, evaluate_rollouts, jerkiness

__version__ = "0.1.0"

__all__ = [
    "Euclidean", "Sphere",
    "PathSample", "flow_matching_loss", "sample_gaussian_path", "sample_geodesic_path",
    "MLP", "AdamEma", "tangent_head",
    "Dopri5", "GeodesicEuler", "integrate_flow", "trace_flow",
    "Dataset", "Demonstration", "Normalization", "ObservationVector", "TrainingPair",
    "load_csv", "load_dataset", "normalize", "project_to_sphere",
    "sample_training_pair", "save_dataset", "split_dataset", "synthesize_letter",
    "PolicyConfig", "TrainedPolicy", "infer_action", "rollout", "train",
    "MetricReport", "dtwd", "evaluate_rollouts", "jerkiness",
]
