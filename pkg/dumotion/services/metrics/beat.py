"""Beat consistency between audio rhythm peaks and body velocity minima.

Velocity row i is frame i+1 minus frame i; a kinematic beat found at
velocity row j is placed on frame j + 1, the frame where the slowdown lands.
"""

import numpy as np

from dumotion.core.exceptions import InvalidArgumentError, MetricUndefinedError
from dumotion.services.data.kinematics import compute_velocity

MIN_FRAMES = 4


def audio_beats(rhythm: np.ndarray) -> np.ndarray:
    """Frame indices of local maxima that rise above the track mean."""
    r = np.asarray(rhythm, dtype=np.float64).reshape(-1)
    if r.size < 3:
        return np.zeros(0, dtype=np.int64)
    inner = r[1:-1]
    peaks = (inner > r[:-2]) & (inner >= r[2:]) & (inner > r.mean())
    return np.flatnonzero(peaks) + 1


def kinematic_beats(body: np.ndarray) -> np.ndarray:
    """Frame indices of local minima of the body speed (L2 over channels)."""
    speed = np.linalg.norm(compute_velocity(np.asarray(body, dtype=np.float64)), axis=1)
    if speed.size < 3:
        return np.zeros(0, dtype=np.int64)
    inner = speed[1:-1]
    minima = (inner < speed[:-2]) & (inner <= speed[2:])
    return np.flatnonzero(minima) + 2


def beat_alignment(
    audio_idx: np.ndarray, kinematic_idx: np.ndarray, sigma_frames: float
) -> float:
    """Mean over audio beats of exp(-d^2 / 2 sigma^2), d the nearest kinematic beat."""
    audio_idx = np.asarray(audio_idx, dtype=np.float64)
    kinematic_idx = np.asarray(kinematic_idx, dtype=np.float64)
    if audio_idx.size == 0:
        raise MetricUndefinedError("bc", "no audio beats detected")
    if kinematic_idx.size == 0:
        raise MetricUndefinedError("bc", "no kinematic beats detected")
    nearest = np.min((audio_idx[:, None] - kinematic_idx[None, :]) ** 2, axis=1)
    return float(np.mean(np.exp(-nearest / (2.0 * sigma_frames**2))))


def beat_consistency(
    body: np.ndarray,
    rhythm: np.ndarray,
    fps: float = 30.0,
    sigma_seconds: float = 0.1,
) -> float:
    """BC score in [0, 1]; undefined when either beat set is empty."""
    body = np.asarray(body)
    rhythm = np.asarray(rhythm)
    if body.ndim != 2 or body.shape[0] < MIN_FRAMES:
        raise InvalidArgumentError(
            f"beat consistency needs at least {MIN_FRAMES} frames",
            {"shape": list(body.shape)},
        )
    if rhythm.reshape(-1).shape[0] != body.shape[0]:
        raise InvalidArgumentError(
            "rhythm and body differ in frame count",
            {"rhythm": int(rhythm.reshape(-1).shape[0]), "body": int(body.shape[0])},
        )
    return beat_alignment(
        audio_beats(rhythm), kinematic_beats(body), sigma_seconds * fps
    )
