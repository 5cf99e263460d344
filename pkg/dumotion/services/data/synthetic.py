"""Pseudo-speech-to-motion generator with identity and emotion structure.

Every sample is driven by smooth latent signals: a content group, a single
rhythm channel and a semantic group. Audio tracks are fixed linear images of
those latents; face coefficients follow the content and rhythm latents, body
coefficients follow the semantic and rhythm latents two frames late. Identity
scales amplitude and tempo, emotion shifts and scales the pre-activation.
"""

from collections.abc import Mapping
from typing import Any

import numpy as np
from pydantic import ValidationError

from dumotion.core.config import validation_details
from dumotion.core.exceptions import InvalidSpecError
from dumotion.core.logging import get_logger
from dumotion.core.models.motion import (
    AudioFeatureTrack,
    Dataset,
    EmotionStyle,
    IdentityStyle,
    MotionSequence,
    Sample,
    SyntheticSpec,
)

logger = get_logger(__name__)

BODY_LAG_FRAMES = 2
MIN_PARTIALS = 3
MAX_PARTIALS = 8
FREQUENCY_RANGE_HZ = (0.25, 2.0)
CHANNEL_GAIN_SPREAD = 0.8


class LatentSignals:
    """Random sinusoid sums evaluated on arbitrary time grids."""

    def __init__(self, rng: np.random.Generator, channels: int) -> None:
        self.partials = []
        for _ in range(channels):
            k = int(rng.integers(MIN_PARTIALS, MAX_PARTIALS + 1))
            self.partials.append(
                (
                    rng.uniform(*FREQUENCY_RANGE_HZ, size=k),
                    rng.uniform(0.0, 2.0 * np.pi, size=k),
                    rng.uniform(0.5, 1.0, size=k),
                )
            )

    def __call__(self, seconds: np.ndarray, frequency_scale: float = 1.0) -> np.ndarray:
        columns = []
        for freqs, phases, amps in self.partials:
            arg = 2.0 * np.pi * np.outer(seconds, freqs * frequency_scale) + phases
            columns.append((amps * np.sin(arg)).sum(axis=1) / np.sqrt(len(freqs)))
        return np.stack(columns, axis=1)


class SyntheticGenerator:
    """Fixed audio and motion maps drawn from ``spec.structure_seed``."""

    def __init__(self, spec: SyntheticSpec) -> None:
        self.spec = spec
        dims = spec.dims
        rng = np.random.default_rng(spec.structure_seed)
        n_c, n_s = spec.content_latents, spec.semantic_latents

        self.content_map = rng.normal(size=(n_c, dims.content)) / np.sqrt(n_c)
        self.semantic_map = rng.normal(size=(n_s, dims.semantics)) / np.sqrt(n_s)
        self.face_map = rng.normal(size=(n_c + 1, dims.face)) / np.sqrt(n_c + 1)
        self.body_map = rng.normal(size=(n_s + 1, dims.body)) / np.sqrt(n_s + 1)

    def latents(
        self, latent_seed: int | tuple[int, ...], frequency_scale: float, lag: int = 0
    ) -> dict[str, np.ndarray]:
        """Content, rhythm and semantic latents on the frame grid shifted by ``lag``."""
        spec = self.spec
        rng = np.random.default_rng(latent_seed)
        content = LatentSignals(rng, spec.content_latents)
        rhythm = LatentSignals(rng, 1)
        semantics = LatentSignals(rng, spec.semantic_latents)
        seconds = (np.arange(spec.n_frames) - lag) / spec.fps
        return {
            "content": content(seconds, frequency_scale),
            "rhythm": rhythm(seconds, frequency_scale),
            "semantics": semantics(seconds, frequency_scale),
        }

    def pre_activation(
        self,
        identity: IdentityStyle,
        emotion: EmotionStyle,
        latent_seed: int | tuple[int, ...],
    ) -> tuple[np.ndarray, np.ndarray]:
        """Face and body coefficients before the tanh squashing."""
        now = self.latents(latent_seed, identity.frequency_scale)
        late = self.latents(latent_seed, identity.frequency_scale, lag=BODY_LAG_FRAMES)
        gain = identity.amplitude_scale * emotion.amplitude_multiplier

        face_offset, body_offset = self.emotion_offsets(emotion)
        face_gain, body_gain = self.channel_gains(identity)
        face = np.hstack([now["content"], now["rhythm"]]) @ self.face_map
        body = np.hstack([late["semantics"], late["rhythm"]]) @ self.body_map
        face = gain * face_gain * face
        body = gain * body_gain * body
        return face + face_offset, body + body_offset

    def channel_gains(self, identity: IdentityStyle) -> tuple[np.ndarray, np.ndarray]:
        dims = self.spec.dims
        if identity.gain_seed is None:
            return np.ones(dims.face), np.ones(dims.body)
        rng = np.random.default_rng([identity.gain_seed, 2])
        return (
            np.exp(CHANNEL_GAIN_SPREAD * rng.normal(size=dims.face)),
            np.exp(CHANNEL_GAIN_SPREAD * rng.normal(size=dims.body)),
        )

    def emotion_offsets(self, emotion: EmotionStyle) -> tuple[np.ndarray, np.ndarray]:
        dims = self.spec.dims
        face = np.random.default_rng([emotion.offset_seed, 0]).normal(size=dims.face)
        body = np.random.default_rng([emotion.offset_seed, 1]).normal(size=dims.body)
        return emotion.offset_scale * face, emotion.offset_scale * body

    def sample(
        self,
        identity: IdentityStyle,
        emotion: EmotionStyle,
        latent_seed: int | tuple[int, ...],
        noise_seed: int | tuple[int, ...],
    ) -> Sample:
        spec = self.spec
        now = self.latents(latent_seed, identity.frequency_scale)
        face_pre, body_pre = self.pre_activation(identity, emotion, latent_seed)

        noise = np.random.default_rng(noise_seed)
        face = np.tanh(face_pre) + spec.noise_std * noise.normal(size=face_pre.shape)
        body = np.tanh(body_pre) + spec.noise_std * noise.normal(size=body_pre.shape)

        audio = AudioFeatureTrack(
            content=now["content"] @ self.content_map,
            rhythm=now["rhythm"],
            semantics=now["semantics"] @ self.semantic_map,
        )
        motion = MotionSequence(
            face=face,
            body=body,
            fps=spec.fps,
            identity_label=identity.label,
            emotion_label=emotion.label,
        )
        return Sample(motion=motion, audio=audio)


def assignment(spec: SyntheticSpec, index: int) -> tuple[IdentityStyle, EmotionStyle]:
    """Identity cycles fastest, then emotion."""
    n_id = len(spec.identities)
    identity = spec.identities[index % n_id]
    emotion = spec.emotions[(index // n_id) % len(spec.emotions)]
    return identity, emotion


def generate_synthetic_dataset(spec: SyntheticSpec | Mapping[str, Any]) -> Dataset:
    """Generate a dataset; a pure function of ``spec``."""
    if not isinstance(spec, SyntheticSpec):
        try:
            spec = SyntheticSpec.model_validate(spec)
        except ValidationError as e:
            raise InvalidSpecError(
                "Invalid synthetic spec", validation_details(e)
            ) from e

    generator = SyntheticGenerator(spec)
    samples = []
    for k in range(spec.n_samples):
        identity, emotion = assignment(spec, k)
        samples.append(
            generator.sample(
                identity,
                emotion,
                latent_seed=(spec.seed, k),
                noise_seed=(spec.seed, k, 1),
            )
        )

    logger.info(
        f"Generated {spec.n_samples} synthetic samples",
        extra={
            "extra": {
                "seed": spec.seed,
                "identities": len(spec.identities),
                "emotions": [e.label.value for e in spec.emotions],
            }
        },
    )
    return Dataset.from_samples(samples, dims=spec.dims, fps=spec.fps, seed=spec.seed)
