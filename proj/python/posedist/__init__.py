"""Camera calibration and ground-plane distances from ankle/shoulder keypoints."""

from ._posedist import (
    Calibration,
    EstimationFailure,
    SchemaError,
    calibrate,
    classify_distance,
    ground_distances,
    ransac_iterations,
    run_study,
    simulate_scene,
)

__all__ = [
    "Calibration",
    "EstimationFailure",
    "SchemaError",
    "calibrate",
    "classify_distance",
    "ground_distances",
    "ransac_iterations",
    "run_study",
    "simulate_scene",
]
