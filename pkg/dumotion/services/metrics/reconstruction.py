"""Face reconstruction errors on expression coefficients."""

import numpy as np

from dumotion.core.exceptions import ShapeMismatchError
from dumotion.services.data.kinematics import compute_velocity


def face_mse_lvd(gen_face: np.ndarray, gt_face: np.ndarray) -> tuple[float, float]:
    """(mean squared error, mean L1 velocity difference)."""
    gen = np.asarray(gen_face, dtype=np.float64)
    gt = np.asarray(gt_face, dtype=np.float64)
    if gen.shape != gt.shape:
        raise ShapeMismatchError(
            "generated and reference faces differ in shape",
            expected=gt.shape,
            actual=gen.shape,
        )
    mse = float(((gen - gt) ** 2).mean())
    lvd = float(np.abs(compute_velocity(gen) - compute_velocity(gt)).mean())
    return mse, lvd
