"""Evaluation metrics: FMD, FGD, BC, DIV, MSE and LVD."""

from dumotion.services.data.kinematics import velocity_profile
from dumotion.services.metrics.beat import (
    audio_beats,
    beat_alignment,
    beat_consistency,
    kinematic_beats,
)
from dumotion.services.metrics.diversity import diversity
from dumotion.services.metrics.extractor import (
    FeatureExtractor,
    MotionAutoencoder,
    fit_feature_extractor,
)
from dumotion.services.metrics.frechet import frechet_distance, sqrtm_psd
from dumotion.services.metrics.reconstruction import face_mse_lvd
from dumotion.services.metrics.report import evaluate_motion, fmd_fgd

__all__ = [
    "velocity_profile",
    "audio_beats",
    "beat_alignment",
    "beat_consistency",
    "kinematic_beats",
    "diversity",
    "FeatureExtractor",
    "MotionAutoencoder",
    "fit_feature_extractor",
    "frechet_distance",
    "sqrtm_psd",
    "face_mse_lvd",
    "evaluate_motion",
    "fmd_fgd",
]
