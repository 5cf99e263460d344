"""Condition vectors and emotion prompts."""

from enum import Enum
from typing import Any

import numpy as np
from pydantic import field_validator, model_validator

from dumotion.core.exceptions import UnknownEmotionError
from dumotion.core.models.base import ArrayModel, as_vector
from dumotion.core.models.motion import (
    EMOTION_LABELS,
    AudioFeatureTrack,
    MotionSequence,
)


class Provenance(str, Enum):
    TEXT = "text"
    AUDIO = "audio"
    MOTION = "motion"
    LOOKUP = "lookup"
    STATS = "stats"


class PromptModality(str, Enum):
    TEXT = "text"
    AUDIO = "audio"
    MOTION = "motion"
    LOOKUP = "lookup"


class ConditionEmbedding(ArrayModel):
    """Emotion and identity vectors of width d_z."""

    z_emotion: np.ndarray
    z_identity_face: np.ndarray
    z_identity_body: np.ndarray
    provenance: Provenance = Provenance.LOOKUP

    @field_validator("z_emotion", "z_identity_face", "z_identity_body", mode="before")
    @classmethod
    def finite_vector(cls, v: Any, info: Any) -> np.ndarray:
        return as_vector(v, info.field_name, dtype=np.float32)

    @model_validator(mode="after")
    def shared_width(self) -> "ConditionEmbedding":
        widths = {
            self.z_emotion.shape[0],
            self.z_identity_face.shape[0],
            self.z_identity_body.shape[0],
        }
        if len(widths) != 1:
            raise ValueError(f"condition vectors disagree on width: {sorted(widths)}")
        return self

    @property
    def latent_dim(self) -> int:
        return int(self.z_emotion.shape[0])

    @classmethod
    def zeros(cls, latent_dim: int) -> "ConditionEmbedding":
        zero = np.zeros(latent_dim, dtype=np.float32)
        return cls(z_emotion=zero, z_identity_face=zero, z_identity_body=zero)


class EmotionPrompt(ArrayModel):
    """A request for an emotion vector in one of the supported modalities."""

    modality: PromptModality
    payload: str | AudioFeatureTrack | MotionSequence

    @model_validator(mode="after")
    def payload_matches(self) -> "EmotionPrompt":
        expected: dict[PromptModality, type] = {
            PromptModality.TEXT: str,
            PromptModality.LOOKUP: str,
            PromptModality.AUDIO: AudioFeatureTrack,
            PromptModality.MOTION: MotionSequence,
        }
        if not isinstance(self.payload, expected[self.modality]):
            raise ValueError(
                f"{self.modality.value} prompt needs a "
                f"{expected[self.modality].__name__}"
            )
        if self.modality == PromptModality.LOOKUP:
            if self.payload not in EMOTION_LABELS:
                raise UnknownEmotionError(str(self.payload))
        return self

    @classmethod
    def lookup(cls, label: str) -> "EmotionPrompt":
        return cls(modality=PromptModality.LOOKUP, payload=label)
