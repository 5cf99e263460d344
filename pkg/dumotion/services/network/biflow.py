"""Bidirectional cross-attention between the face and body streams."""

import math

import torch
from torch import nn

from dumotion.core.exceptions import ShapeMismatchError
from dumotion.services.network.layers import zero_module


class FlowDirection(nn.Module):
    """One direction: the destination stream queries the source stream."""

    def __init__(self, d_model: int) -> None:
        super().__init__()
        self.q_proj = nn.Linear(d_model, d_model)
        self.k_proj = nn.Linear(d_model, d_model)
        self.v_proj = nn.Linear(d_model, d_model)
        self.norm = nn.LayerNorm(d_model)
        self.mlp = nn.Sequential(
            nn.Linear(d_model, d_model),
            nn.GELU(),
            zero_module(nn.Linear(d_model, d_model)),
        )

    def cross(self, source: torch.Tensor, dest: torch.Tensor) -> torch.Tensor:
        """softmax(Q_dest K_source^T / sqrt(d)) V_source."""
        q = self.q_proj(dest)
        k = self.k_proj(source)
        v = self.v_proj(source)
        scores = q @ k.transpose(-2, -1) / math.sqrt(q.shape[-1])
        return torch.softmax(scores, dim=-1) @ v

    def forward(self, source: torch.Tensor, dest: torch.Tensor) -> torch.Tensor:
        return self.mlp(self.norm(self.cross(source, dest))) + dest


class BiFlow(nn.Module):
    """Exchange block; both directions read the pre-exchange features."""

    def __init__(self, d_model: int) -> None:
        super().__init__()
        self.face_to_body = FlowDirection(d_model)
        self.body_to_face = FlowDirection(d_model)

    def forward(
        self, f_face: torch.Tensor, f_body: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor]:
        return biflow_exchange(f_face, f_body, self)


def biflow_exchange(
    f_face: torch.Tensor, f_body: torch.Tensor, block: BiFlow
) -> tuple[torch.Tensor, torch.Tensor]:
    if f_face.shape != f_body.shape:
        raise ShapeMismatchError(
            "face and body streams differ in shape",
            expected=tuple(f_face.shape),
            actual=tuple(f_body.shape),
        )
    body_new = block.face_to_body(f_face, f_body)
    face_new = block.body_to_face(f_body, f_face)
    return face_new, body_new
