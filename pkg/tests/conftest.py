"""Shared fixtures: toy specs, toy networks, tiny datasets and input factories."""

from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np
import pytest
import torch

from dumotion.core.models.experiment import ConditioningConfig
from dumotion.core.models.motion import (
    AudioFeatureTrack,
    Dataset,
    EmotionLabel,
    EmotionStyle,
    IdentityStyle,
    MotionDims,
    SyntheticSpec,
)
from dumotion.core.models.network import (
    ConditionSource,
    DiffusionConfig,
    DUTransConfig,
    PEFTConfig,
)
from dumotion.core.models.training import TrainConfig
from dumotion.services.data.batching import AudioBatch
from dumotion.services.data.synthetic import generate_synthetic_dataset
from dumotion.services.network.dutrans import DUTrans, build_model
from dumotion.services.training.checkpoints import TrainingRun
from dumotion.services.training.trainer import finetune, pretrain

TOY_DIMS = MotionDims(face=4, body=6, content=5, semantics=5)
TOY_FRAMES = 12
TOY_FRACTIONS = (0.5, 0.25, 0.25)

ModelInputs = tuple[torch.Tensor, torch.Tensor, AudioBatch, torch.Tensor]


@pytest.fixture
def toy_dims() -> MotionDims:
    return TOY_DIMS


@pytest.fixture
def toy_spec() -> SyntheticSpec:
    """Two speakers, neutral only, 12 clips of 12 frames."""
    return SyntheticSpec(
        n_samples=12,
        n_frames=TOY_FRAMES,
        dims=TOY_DIMS,
        identities=[
            IdentityStyle(label="speaker-a"),
            IdentityStyle(
                label="speaker-b", amplitude_scale=1.5, frequency_scale=1.3, gain_seed=1
            ),
        ],
        emotions=[EmotionStyle(offset_scale=0.0)],
        seed=3,
    )


@pytest.fixture
def emotional_spec(toy_spec: SyntheticSpec) -> SyntheticSpec:
    return toy_spec.model_copy(
        update={
            "emotions": [
                EmotionStyle(label=EmotionLabel.NEUTRAL, offset_scale=0.0),
                EmotionStyle(
                    label=EmotionLabel.HAPPINESS,
                    offset_seed=4,
                    amplitude_multiplier=1.3,
                    offset_scale=0.5,
                ),
            ]
        }
    )


@pytest.fixture
def toy_dataset(toy_spec: SyntheticSpec) -> Dataset:
    return generate_synthetic_dataset(toy_spec)


@pytest.fixture
def emotional_dataset(emotional_spec: SyntheticSpec) -> Dataset:
    return generate_synthetic_dataset(emotional_spec)


@pytest.fixture
def toy_model_config() -> DUTransConfig:
    return DUTransConfig(
        hidden_dim=16,
        encoder_layers=2,
        decoder_layers=1,
        n_heads=2,
        biflow_layers=[1],
        dims=TOY_DIMS,
        max_frames=TOY_FRAMES,
        dropout=0.0,
    )


@pytest.fixture
def toy_model(toy_model_config: DUTransConfig) -> DUTrans:
    return build_model(toy_model_config, seed=0).eval()


@pytest.fixture
def toy_diffusion_config() -> DiffusionConfig:
    return DiffusionConfig(steps=8)


@pytest.fixture
def short_train() -> TrainConfig:
    return TrainConfig(batch_size=4, iterations=3, log_every=1, seed=0)


@pytest.fixture
def make_inputs() -> Callable[..., ModelInputs]:
    """Factory for random noisy motion, audio and step tensors."""

    def make(
        batch: int = 2,
        frames: int = TOY_FRAMES,
        dims: MotionDims = TOY_DIMS,
        seed: int = 0,
        dtype: torch.dtype = torch.float32,
    ) -> ModelInputs:
        g = torch.Generator().manual_seed(seed)
        face = torch.randn(batch, frames, dims.face, generator=g, dtype=dtype)
        body = torch.randn(batch, frames, dims.body, generator=g, dtype=dtype)
        audio = AudioBatch(
            content=torch.randn(batch, frames, dims.content, generator=g, dtype=dtype),
            rhythm=torch.randn(batch, frames, 1, generator=g, dtype=dtype),
            semantics=torch.randn(
                batch, frames, dims.semantics, generator=g, dtype=dtype
            ),
        )
        t = torch.randint(0, 1000, (batch,), generator=g)
        return face, body, audio, t

    return make


@pytest.fixture
def make_track() -> Callable[..., AudioFeatureTrack]:
    def make(frames: int = TOY_FRAMES, dims: MotionDims = TOY_DIMS, seed: int = 0):
        rng = np.random.default_rng(seed)
        return AudioFeatureTrack(
            content=rng.normal(size=(frames, dims.content)),
            rhythm=rng.normal(size=(frames, 1)),
            semantics=rng.normal(size=(frames, dims.semantics)),
        )

    return make


@pytest.fixture
def toy_experiment(tmp_path: Path) -> dict[str, Any]:
    """Raw experiment mapping that trains and samples in well under a second."""
    return {
        "paths": {"output": str(tmp_path / "out")},
        "data": {
            "n_samples": 12,
            "n_frames": TOY_FRAMES,
            "dims": TOY_DIMS.model_dump(),
            "identities": [
                {"label": "speaker-a"},
                {"label": "speaker-b", "amplitude_scale": 1.4, "gain_seed": 2},
            ],
            "emotions": [
                {"label": "neutral", "offset_scale": 0.0},
                {"label": "happiness", "offset_seed": 4, "offset_scale": 0.5},
            ],
            "seed": 3,
        },
        "split": dict(zip(("train", "val", "test"), TOY_FRACTIONS, strict=True)),
        "model": {
            "hidden_dim": 16,
            "encoder_layers": 2,
            "decoder_layers": 1,
            "n_heads": 2,
            "biflow_layers": [1],
            "max_frames": TOY_FRAMES,
            "dropout": 0.0,
        },
        "diffusion": {"steps": 5},
        "conditioning": {"latent_dim": 8, "hidden_dim": 8},
        "train": {"batch_size": 4, "iterations": 2, "log_every": 1},
        "finetune": {
            "peft": {"rank": 4, "prefix_length": 4},
            "train": {"batch_size": 4, "iterations": 2, "log_every": 1},
        },
        "evaluate": {
            "extractor": {"latent_dim": 4, "channels": 8, "epochs": 5},
            "div_pairs": 3,
        },
        "ablate": {"eval_samples": 2},
    }


@pytest.fixture
def pretrained(
    toy_dataset: Dataset,
    toy_model_config: DUTransConfig,
    short_train: TrainConfig,
    toy_diffusion_config: DiffusionConfig,
) -> TrainingRun:
    return pretrain(toy_dataset, toy_model_config, short_train, toy_diffusion_config)


@pytest.fixture
def toy_conditioning() -> ConditioningConfig:
    return ConditioningConfig(latent_dim=8, hidden_dim=8)


@pytest.fixture
def finetuned(
    pretrained: TrainingRun,
    emotional_dataset: Dataset,
    short_train: TrainConfig,
    toy_conditioning: ConditioningConfig,
) -> TrainingRun:
    return finetune(
        pretrained,
        emotional_dataset,
        PEFTConfig(rank=4),
        short_train,
        ConditionSource.EMOTION,
        toy_conditioning,
    )
