"""Motion datasets: synthesis, splits, storage and batching."""

from dumotion.services.data.batching import AudioBatch, MotionBatch
from dumotion.services.data.kinematics import compute_velocity, velocity_profile
from dumotion.services.data.repository import (
    DatasetRepository,
    dataset_hash,
    dataset_repository,
    experiment_dataset,
)
from dumotion.services.data.splits import select_split, split_dataset
from dumotion.services.data.synthetic import (
    SyntheticGenerator,
    generate_synthetic_dataset,
)

__all__ = [
    "AudioBatch",
    "MotionBatch",
    "compute_velocity",
    "velocity_profile",
    "DatasetRepository",
    "dataset_hash",
    "dataset_repository",
    "experiment_dataset",
    "select_split",
    "split_dataset",
    "SyntheticGenerator",
    "generate_synthetic_dataset",
]
