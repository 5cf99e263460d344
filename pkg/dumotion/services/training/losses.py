"""Reconstruction and velocity losses.

Every function accepts numpy arrays or torch tensors, unbatched (N, D) or
batched (B, N, D); batched inputs are averaged over the batch.
"""

from typing import TypeVar

import numpy as np
import torch

from dumotion.core.exceptions import InvalidArgumentError, ShapeMismatchError

Array = TypeVar("Array", np.ndarray, torch.Tensor)


def _check_pair(target: Array, prediction: Array, name: str) -> None:
    if tuple(target.shape) != tuple(prediction.shape):
        raise ShapeMismatchError(
            f"{name}: prediction shape differs from target",
            expected=tuple(target.shape),
            actual=tuple(prediction.shape),
        )


def loss_simple(x0: Array, x0_hat: Array) -> Array:
    """Mean squared error over all entries."""
    _check_pair(x0, x0_hat, "loss_simple")
    return ((x0 - x0_hat) ** 2).mean()


def loss_velocity(target: Array, prediction: Array) -> Array:
    """Squared L2 of frame-difference residuals, summed per frame, averaged over N-1."""
    _check_pair(target, prediction, "loss_velocity")
    if target.ndim < 2 or target.shape[-2] < 2:
        raise InvalidArgumentError(
            "velocity loss needs at least 2 frames", {"shape": list(target.shape)}
        )
    residual = (target[..., 1:, :] - target[..., :-1, :]) - (
        prediction[..., 1:, :] - prediction[..., :-1, :]
    )
    return (residual**2).sum(-1).mean()


def stream_loss(target: Array, prediction: Array) -> Array:
    return loss_simple(target, prediction) + loss_velocity(target, prediction)


def loss_components(
    face: Array,
    face_hat: Array,
    body: Array,
    body_hat: Array,
    holistic: Array,
    holistic_hat: Array,
    lambda_face: float = 0.5,
    lambda_body: float = 0.5,
) -> dict[str, Array]:
    """Per-stream losses and their weighted total."""
    if holistic.shape[-1] != face.shape[-1] + body.shape[-1]:
        raise ShapeMismatchError(
            "holistic width must equal face plus body width",
            expected=(face.shape[-1] + body.shape[-1],),
            actual=(holistic.shape[-1],),
        )
    l_h = stream_loss(holistic, holistic_hat)
    l_f = stream_loss(face, face_hat)
    l_b = stream_loss(body, body_hat)
    return {
        "holistic": l_h,
        "face": l_f,
        "body": l_b,
        "total": l_h + lambda_face * l_f + lambda_body * l_b,
    }


def total_loss(
    face: Array,
    face_hat: Array,
    body: Array,
    body_hat: Array,
    holistic: Array,
    holistic_hat: Array,
    lambda_face: float = 0.5,
    lambda_body: float = 0.5,
) -> Array:
    return loss_components(
        face, face_hat, body, body_hat, holistic, holistic_hat, lambda_face, lambda_body
    )["total"]
