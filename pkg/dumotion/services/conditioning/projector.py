"""Projection of condition inputs to per-branch adapter vectors."""

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from dumotion.core.exceptions import ShapeMismatchError
from dumotion.core.models.network import ConditionMode, ConditionSource
from dumotion.core.models.training import IdentityReference
from dumotion.services.conditioning.identity import IdentityCoder
from dumotion.services.network.layers import zero_module


def _stack(rows: list[list[float]]) -> torch.Tensor:
    return torch.as_tensor(np.asarray(rows), dtype=torch.float32)


@dataclass(frozen=True)
class ConditionBatch:
    """Raw condition inputs for a batch.

    Emotion tasks fill ``emotion`` (B, d_z); identity tasks fill the
    reference statistics, which pass through the trainable identity coder.
    """

    emotion: torch.Tensor | None = None
    face_stats: torch.Tensor | None = None
    body_stats: torch.Tensor | None = None

    @property
    def batch_size(self) -> int:
        for value in (self.emotion, self.face_stats, self.body_stats):
            if value is not None:
                return int(value.shape[0])
        return 0

    @classmethod
    def from_emotion(cls, vectors: list[np.ndarray]) -> "ConditionBatch":
        return cls(emotion=torch.as_tensor(np.stack(vectors), dtype=torch.float32))

    @classmethod
    def from_identity(cls, references: list[IdentityReference]) -> "ConditionBatch":
        return cls(
            face_stats=_stack([r.face_stats for r in references]),
            body_stats=_stack([r.body_stats for r in references]),
        )

    def index(self, idx: torch.Tensor) -> "ConditionBatch":
        return ConditionBatch(
            *(
                None if v is None else v[idx]
                for v in (self.emotion, self.face_stats, self.body_stats)
            )
        )


class ConditionProjector(nn.Module):
    """Maps d_z condition codes to width d (or 2d scale/shift pairs) per branch."""

    def __init__(
        self,
        source: ConditionSource,
        mode: ConditionMode,
        latent_dim: int,
        hidden_dim: int,
        face_dim: int,
        body_dim: int,
        coder_hidden: int = 64,
    ) -> None:
        super().__init__()
        self.source = source
        out = 2 * hidden_dim if mode == ConditionMode.STYLIZE else hidden_dim
        self.identity_coder = (
            IdentityCoder(face_dim, body_dim, latent_dim, coder_hidden)
            if source == ConditionSource.IDENTITY
            else None
        )
        self.face = nn.Linear(latent_dim, out)
        self.body = nn.Linear(latent_dim, out)
        if mode == ConditionMode.STYLIZE:
            zero_module(self.face)
            zero_module(self.body)

    def forward(self, cond: ConditionBatch) -> tuple[torch.Tensor, torch.Tensor]:
        dtype = self.face.weight.dtype
        if self.source == ConditionSource.IDENTITY:
            face_stats, body_stats = cond.face_stats, cond.body_stats
            if face_stats is None or body_stats is None or self.identity_coder is None:
                raise ShapeMismatchError(
                    "identity conditioning needs face and body statistics"
                )
            z_face, z_body = self.identity_coder(
                face_stats.to(dtype), body_stats.to(dtype)
            )
        else:
            if cond.emotion is None:
                raise ShapeMismatchError("emotion conditioning needs emotion vectors")
            z_face = z_body = cond.emotion.to(dtype)
        return self.face(z_face), self.body(z_body)
