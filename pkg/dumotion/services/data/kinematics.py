"""Frame differences of coefficient tracks."""

import numpy as np

from dumotion.core.exceptions import InvalidArgumentError


def compute_velocity(seq: np.ndarray) -> np.ndarray:
    """Forward differences: row i is ``seq[i + 1] - seq[i]``."""
    array = np.asarray(seq)
    if array.ndim != 2:
        raise InvalidArgumentError(
            f"velocity needs an N x D matrix, got shape {array.shape}",
            {"shape": list(array.shape)},
        )
    if array.shape[0] < 2:
        raise InvalidArgumentError(
            f"velocity needs at least 2 frames, got {array.shape[0]}",
            {"frames": array.shape[0]},
        )
    return array[1:] - array[:-1]


def velocity_profile(seq: np.ndarray) -> np.ndarray:
    """Per-frame mean absolute velocity over channels, length N - 1."""
    return np.abs(compute_velocity(seq)).mean(axis=1)
