"""Motion, audio-feature and dataset models."""

from enum import Enum
from typing import Any

import numpy as np
from pydantic import Field, field_validator, model_validator

from dumotion.core.models.base import ArrayModel, DUMotionModel, as_matrix

DATASET_FORMAT_VERSION = "dumotion-ds-v1"


class EmotionLabel(str, Enum):
    """The eight emotion categories, in lookup-table row order."""

    SADNESS = "sadness"
    CONTEMPT = "contempt"
    NEUTRAL = "neutral"
    FEAR = "fear"
    ANGER = "anger"
    HAPPINESS = "happiness"
    DISGUST = "disgust"
    SURPRISE = "surprise"


EMOTION_LABELS: tuple[str, ...] = tuple(e.value for e in EmotionLabel)


class MotionDims(DUMotionModel):
    """Channel widths of the motion and audio tracks."""

    face: int = Field(default=12, ge=1)
    body: int = Field(default=24, ge=1)
    content: int = Field(default=16, ge=1)
    semantics: int = Field(default=16, ge=1)

    @property
    def holistic(self) -> int:
        return self.face + self.body

    @classmethod
    def full_scale(cls) -> "MotionDims":
        """Expression 100, pose 55x3, wav2vec2 1024, BERT 1536."""
        return cls(face=100, body=165, content=1024, semantics=1536)


class MotionSequence(ArrayModel):
    """Paired face and body coefficient tracks."""

    face: np.ndarray
    body: np.ndarray
    fps: float = Field(default=30.0, gt=0)
    identity_label: str = ""
    emotion_label: EmotionLabel = EmotionLabel.NEUTRAL

    @field_validator("face", "body", mode="before")
    @classmethod
    def finite_matrix(cls, v: Any, info: Any) -> np.ndarray:
        return as_matrix(v, info.field_name)

    @model_validator(mode="after")
    def aligned_tracks(self) -> "MotionSequence":
        if self.face.shape[0] != self.body.shape[0]:
            raise ValueError(
                f"face has {self.face.shape[0]} frames, body has {self.body.shape[0]}"
            )
        if self.face.shape[0] < 2:
            raise ValueError("motion needs at least 2 frames")
        return self

    @property
    def n_frames(self) -> int:
        return int(self.face.shape[0])

    @property
    def holistic(self) -> np.ndarray:
        """[face | body] column order used by the holistic head."""
        return np.concatenate([self.face, self.body], axis=1)

    @classmethod
    def from_holistic(
        cls,
        holistic: np.ndarray,
        face_dim: int,
        fps: float = 30.0,
        identity_label: str = "",
        emotion_label: EmotionLabel | str = EmotionLabel.NEUTRAL,
    ) -> "MotionSequence":
        return cls(
            face=holistic[:, :face_dim],
            body=holistic[:, face_dim:],
            fps=fps,
            identity_label=identity_label,
            emotion_label=EmotionLabel(emotion_label),
        )


class AudioFeatureTrack(ArrayModel):
    """Per-frame content, rhythm and semantic features."""

    content: np.ndarray
    rhythm: np.ndarray
    semantics: np.ndarray

    @field_validator("content", "rhythm", "semantics", mode="before")
    @classmethod
    def finite_matrix(cls, v: Any, info: Any) -> np.ndarray:
        return as_matrix(v, info.field_name)

    @model_validator(mode="after")
    def aligned_tracks(self) -> "AudioFeatureTrack":
        if self.rhythm.shape[1] != 1:
            raise ValueError(f"rhythm must have 1 channel, got {self.rhythm.shape[1]}")
        frames = {self.content.shape[0], self.rhythm.shape[0], self.semantics.shape[0]}
        if len(frames) != 1:
            raise ValueError(f"audio tracks disagree on frame count: {sorted(frames)}")
        return self

    @property
    def n_frames(self) -> int:
        return int(self.content.shape[0])


class Sample(ArrayModel):
    """One motion clip with its frame-aligned audio features."""

    motion: MotionSequence
    audio: AudioFeatureTrack

    @model_validator(mode="after")
    def same_length(self) -> "Sample":
        if self.motion.n_frames != self.audio.n_frames:
            raise ValueError(
                f"motion has {self.motion.n_frames} frames, "
                f"audio has {self.audio.n_frames}"
            )
        return self

    @property
    def identity_label(self) -> str:
        return self.motion.identity_label

    @property
    def emotion_label(self) -> EmotionLabel:
        return self.motion.emotion_label


class SampleRecord(DUMotionModel):
    """Manifest entry for one stored sample."""

    index: int = Field(ge=0)
    n_frames: int = Field(ge=2)
    identity: str
    emotion: EmotionLabel


class DatasetManifest(DUMotionModel):
    """Human-readable description of a stored dataset."""

    format_version: str = DATASET_FORMAT_VERSION
    dims: MotionDims = Field(default_factory=MotionDims)
    fps: float = Field(default=30.0, gt=0)
    seed: int = 0
    split: str = "all"
    samples: list[SampleRecord] = Field(default_factory=list)


class Dataset(ArrayModel):
    """Ordered samples plus manifest; all samples share the manifest dims."""

    samples: list[Sample]
    manifest: DatasetManifest

    @model_validator(mode="after")
    def shared_dims(self) -> "Dataset":
        dims = self.manifest.dims
        for k, sample in enumerate(self.samples):
            widths = (
                sample.motion.face.shape[1],
                sample.motion.body.shape[1],
                sample.audio.content.shape[1],
                sample.audio.semantics.shape[1],
            )
            if widths != (dims.face, dims.body, dims.content, dims.semantics):
                raise ValueError(
                    f"sample {k} widths {widths} disagree with manifest dims"
                )
        return self

    def __len__(self) -> int:
        return len(self.samples)

    @classmethod
    def from_samples(
        cls,
        samples: list[Sample],
        dims: MotionDims,
        fps: float = 30.0,
        seed: int = 0,
        split: str = "all",
    ) -> "Dataset":
        records = [
            SampleRecord(
                index=k,
                n_frames=s.motion.n_frames,
                identity=s.identity_label,
                emotion=s.emotion_label,
            )
            for k, s in enumerate(samples)
        ]
        manifest = DatasetManifest(
            dims=dims, fps=fps, seed=seed, split=split, samples=records
        )
        return cls(samples=samples, manifest=manifest)

    def subset(self, indices: list[int], split: str) -> "Dataset":
        """Samples at ``indices`` (in the given order) under a new split tag."""
        return Dataset.from_samples(
            [self.samples[i] for i in indices],
            dims=self.manifest.dims,
            fps=self.manifest.fps,
            seed=self.manifest.seed,
            split=split,
        )

    @property
    def identities(self) -> list[str]:
        return sorted({s.identity_label for s in self.samples})


# Synthetic generator specification


class IdentityStyle(DUMotionModel):
    """Per-identity amplitude, tempo and per-channel gain pattern.

    ``gain_seed`` draws a fixed log-normal gain per motion channel; unset
    means unit gains.
    """

    label: str
    amplitude_scale: float = Field(default=1.0, gt=0)
    frequency_scale: float = Field(default=1.0, gt=0)
    gain_seed: int | None = Field(default=None, ge=0)


class EmotionStyle(DUMotionModel):
    """Per-emotion coefficient offset and amplitude multiplier."""

    label: EmotionLabel = EmotionLabel.NEUTRAL
    offset_seed: int = Field(default=0, ge=0)
    amplitude_multiplier: float = Field(default=1.0, gt=0)
    offset_scale: float = Field(default=0.3, ge=0)


class SyntheticSpec(DUMotionModel):
    """Parameters of the pseudo-speech-to-motion generator."""

    n_samples: int = Field(default=200, ge=1)
    n_frames: int = Field(default=60, ge=2)
    fps: float = Field(default=30.0, gt=0)
    dims: MotionDims = Field(default_factory=MotionDims)
    identities: list[IdentityStyle] = Field(
        default_factory=lambda: [IdentityStyle(label="speaker-0")], min_length=1
    )
    emotions: list[EmotionStyle] = Field(
        default_factory=lambda: [EmotionStyle(offset_scale=0.0)], min_length=1
    )
    noise_std: float = Field(default=0.01, ge=0)
    seed: int = Field(default=0, ge=0)
    structure_seed: int = Field(
        default=0,
        ge=0,
        description="Seed of the fixed audio/motion maps; shared across domains",
    )
    content_latents: int = Field(default=4, ge=1)
    semantic_latents: int = Field(default=4, ge=1)

    @field_validator("identities")
    @classmethod
    def unique_identities(cls, v: list[IdentityStyle]) -> list[IdentityStyle]:
        labels = [i.label for i in v]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate identity labels: {labels}")
        return v
