"""Stacking samples into tensors for training and sampling."""

from dataclasses import dataclass

import numpy as np
import torch

from dumotion.core.exceptions import InvalidArgumentError, ShapeMismatchError
from dumotion.core.models.motion import AudioFeatureTrack, Dataset, Sample


@dataclass(frozen=True)
class AudioBatch:
    """Audio tracks shaped (B, N, C)."""

    content: torch.Tensor
    rhythm: torch.Tensor
    semantics: torch.Tensor

    @classmethod
    def from_tracks(
        cls, tracks: list[AudioFeatureTrack], dtype: torch.dtype = torch.float32
    ) -> "AudioBatch":
        return cls(
            content=_stack([t.content for t in tracks], dtype),
            rhythm=_stack([t.rhythm for t in tracks], dtype),
            semantics=_stack([t.semantics for t in tracks], dtype),
        )

    def index(self, idx: torch.Tensor) -> "AudioBatch":
        return AudioBatch(self.content[idx], self.rhythm[idx], self.semantics[idx])

    def to(self, dtype: torch.dtype) -> "AudioBatch":
        return AudioBatch(
            self.content.to(dtype), self.rhythm.to(dtype), self.semantics.to(dtype)
        )

    @property
    def n_frames(self) -> int:
        return int(self.content.shape[1])


@dataclass(frozen=True)
class MotionBatch:
    """Face and body targets shaped (B, N, D) with their audio."""

    face: torch.Tensor
    body: torch.Tensor
    audio: AudioBatch

    @classmethod
    def from_samples(
        cls, samples: list[Sample], dtype: torch.dtype = torch.float32
    ) -> "MotionBatch":
        if not samples:
            raise InvalidArgumentError("cannot batch an empty sample list")
        return cls(
            face=_stack([s.motion.face for s in samples], dtype),
            body=_stack([s.motion.body for s in samples], dtype),
            audio=AudioBatch.from_tracks([s.audio for s in samples], dtype),
        )

    @classmethod
    def from_dataset(
        cls, ds: Dataset, dtype: torch.dtype = torch.float32
    ) -> "MotionBatch":
        return cls.from_samples(list(ds.samples), dtype)

    def __len__(self) -> int:
        return int(self.face.shape[0])

    @property
    def holistic(self) -> torch.Tensor:
        return torch.cat([self.face, self.body], dim=-1)

    def index(self, idx: torch.Tensor) -> "MotionBatch":
        return MotionBatch(self.face[idx], self.body[idx], self.audio.index(idx))


def _stack(arrays: list[np.ndarray], dtype: torch.dtype) -> torch.Tensor:
    lengths = {a.shape[0] for a in arrays}
    if len(lengths) != 1:
        raise ShapeMismatchError(
            f"samples in one batch must share a frame count, got {sorted(lengths)}"
        )
    return torch.from_numpy(np.stack(arrays)).to(dtype)
