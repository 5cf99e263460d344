"""Emotion embedding space, prompt backends and the backend registry."""

import re
from abc import ABC, abstractmethod

import numpy as np
import torch

from dumotion.core.exceptions import (
    InvalidArgumentError,
    UnknownEmotionError,
    UnregisteredModalityError,
)
from dumotion.core.models.conditioning import EmotionPrompt, PromptModality
from dumotion.core.models.motion import (
    EMOTION_LABELS,
    AudioFeatureTrack,
    MotionSequence,
)

# Adjective and noun forms accepted by the text backend
EMOTION_WORDS: dict[str, str] = {
    "sad": "sadness",
    "sadness": "sadness",
    "unhappy": "sadness",
    "contempt": "contempt",
    "contemptuous": "contempt",
    "scornful": "contempt",
    "neutral": "neutral",
    "calm": "neutral",
    "fear": "fear",
    "fearful": "fear",
    "afraid": "fear",
    "scared": "fear",
    "anger": "anger",
    "angry": "anger",
    "furious": "anger",
    "happiness": "happiness",
    "happy": "happiness",
    "joyful": "happiness",
    "glad": "happiness",
    "disgust": "disgust",
    "disgusted": "disgust",
    "surprise": "surprise",
    "surprised": "surprise",
    "astonished": "surprise",
}


def _unit(v: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise InvalidArgumentError("cannot normalize a zero vector")
    return (v / norm).astype(np.float32)


class EmotionSpace:
    """Eight orthonormal category rows, a pure function of ``seed``."""

    def __init__(self, latent_dim: int = 32, seed: int = 0) -> None:
        if latent_dim < len(EMOTION_LABELS):
            raise InvalidArgumentError(
                f"latent_dim {latent_dim} cannot hold "
                f"{len(EMOTION_LABELS)} orthogonal rows"
            )
        self.latent_dim = latent_dim
        self.seed = seed
        rng = np.random.default_rng(seed)
        q, r = np.linalg.qr(rng.normal(size=(latent_dim, len(EMOTION_LABELS))))
        # Sign fix makes the factorization unique
        q = q * np.sign(np.diag(r))
        self.table = q.T.astype(np.float32)

    @classmethod
    def from_rows(cls, rows: list[list[float]], seed: int = 0) -> "EmotionSpace":
        space = cls.__new__(cls)
        space.table = np.asarray(rows, dtype=np.float32)
        space.latent_dim = space.table.shape[1]
        space.seed = seed
        return space

    def index(self, label: str) -> int:
        if label not in EMOTION_LABELS:
            raise UnknownEmotionError(label)
        return EMOTION_LABELS.index(label)

    def row(self, label: str) -> np.ndarray:
        return self.table[self.index(label)].copy()

    def nearest(self, z: np.ndarray) -> str:
        """Category whose row has the highest cosine similarity to ``z``."""
        sims = self.table @ _unit(np.asarray(z, dtype=np.float64))
        return EMOTION_LABELS[int(np.argmax(sims))]


def sequence_features(payload: AudioFeatureTrack | MotionSequence) -> np.ndarray:
    """Per-frame input of the modality encoders, shape (N, C)."""
    if isinstance(payload, AudioFeatureTrack):
        return np.hstack([payload.content, payload.rhythm, payload.semantics])
    return payload.holistic


class EmotionBackend(ABC):
    """Maps prompt payloads of one modality to unit-norm vectors."""

    modality: PromptModality

    @abstractmethod
    def embed(self, payload: object) -> np.ndarray: ...


class LookupBackend(EmotionBackend):
    modality = PromptModality.LOOKUP

    def __init__(self, space: EmotionSpace) -> None:
        self.space = space

    def embed(self, payload: object) -> np.ndarray:
        return _unit(self.space.row(str(payload)))


class TextBackend(EmotionBackend):
    """Resolves sentences such as "The person is happy" to a lookup row."""

    modality = PromptModality.TEXT

    def __init__(self, space: EmotionSpace) -> None:
        self.space = space

    @staticmethod
    def parse(text: str) -> str:
        for word in re.findall(r"[a-z]+", text.lower()):
            if word in EMOTION_WORDS:
                return EMOTION_WORDS[word]
        raise UnknownEmotionError(text)

    def embed(self, payload: object) -> np.ndarray:
        return _unit(self.space.row(self.parse(str(payload))))


class SequenceBackend(EmotionBackend):
    """Trained modality encoder for audio tracks or motion clips."""

    def __init__(self, modality: PromptModality, encoder: torch.nn.Module) -> None:
        if modality not in (PromptModality.AUDIO, PromptModality.MOTION):
            raise InvalidArgumentError(
                f"sequence backend cannot serve '{modality.value}'"
            )
        self.modality = modality
        self.encoder = encoder

    def embed(self, payload: object) -> np.ndarray:
        if not isinstance(payload, (AudioFeatureTrack, MotionSequence)):
            raise InvalidArgumentError(
                "sequence backend needs an audio track or motion clip"
            )
        dtype = next(self.encoder.parameters()).dtype
        features = torch.as_tensor(sequence_features(payload), dtype=dtype)[None]
        self.encoder.eval()
        with torch.no_grad():
            z = self.encoder(features)[0]
        return _unit(z.double().numpy())


class EmotionEmbedder:
    """Registry of backends keyed by prompt modality."""

    def __init__(self, backends: list[EmotionBackend] | None = None) -> None:
        self._backends: dict[PromptModality, EmotionBackend] = {}
        for backend in backends or []:
            self.register(backend)

    @classmethod
    def with_defaults(cls, space: EmotionSpace) -> "EmotionEmbedder":
        return cls([LookupBackend(space), TextBackend(space)])

    def register(self, backend: EmotionBackend) -> None:
        self._backends[backend.modality] = backend

    def embed(self, prompt: EmotionPrompt) -> np.ndarray:
        backend = self._backends.get(prompt.modality)
        if backend is None:
            raise UnregisteredModalityError(prompt.modality.value)
        return backend.embed(prompt.payload)


def emotion_embed(
    prompt: EmotionPrompt, backend: EmotionBackend | EmotionEmbedder
) -> np.ndarray:
    if isinstance(backend, EmotionEmbedder):
        return backend.embed(prompt)
    if backend.modality != prompt.modality:
        raise UnregisteredModalityError(prompt.modality.value)
    return backend.embed(prompt.payload)
