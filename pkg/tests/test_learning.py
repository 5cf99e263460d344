"""End-to-end learning checks on the synthetic generator (minutes on CPU)."""

from typing import Any

import pytest

from dumotion.core.config import experiment_from_mapping
from dumotion.core.models.experiment import ExperimentConfig
from dumotion.core.models.metrics import FeatureScope, MetricReport
from dumotion.core.models.motion import Dataset
from dumotion.services.conditioning.context import ConditionContext
from dumotion.services.conditioning.projector import ConditionBatch
from dumotion.services.data.repository import experiment_dataset
from dumotion.services.data.splits import split_dataset
from dumotion.services.diffusion.gaussian import GaussianDiffusion
from dumotion.services.metrics.extractor import FeatureExtractor, fit_feature_extractor
from dumotion.services.metrics.report import evaluate_motion
from dumotion.services.network.dutrans import DUTrans, build_model
from dumotion.services.peft.inject import frozen_hashes
from dumotion.services.training.checkpoints import TrainingRun
from dumotion.services.training.generation import generate
from dumotion.services.training.trainer import finetune, pretrain

pytestmark = pytest.mark.slow

NEUTRAL: dict[str, Any] = {
    "data": {"n_samples": 200, "n_frames": 60, "seed": 0},
    "split": {"train": 0.8, "val": 0.05, "test": 0.15},
    "model": {"hidden_dim": 64, "dropout": 0.0},
    "train": {"lr": 5e-4, "batch_size": 16, "iterations": 3000, "log_every": 500},
    "conditioning": {"latent_dim": 16, "hidden_dim": 32},
    "finetune": {
        "peft": {"rank": 16},
        "train": {"lr": 1e-3, "batch_size": 16, "iterations": 500, "log_every": 100},
    },
    "evaluate": {"extractor": {"latent_dim": 8, "epochs": 200}, "div_pairs": 50},
}


def emotional(raw: dict[str, Any]) -> dict[str, Any]:
    """Same speakers and audio mapping, shifted by a happiness offset."""
    data = {
        **raw["data"],
        "seed": 1,
        "emotions": [
            {
                "label": "happiness",
                "offset_seed": 4,
                "offset_scale": 0.5,
                "amplitude_multiplier": 1.3,
            }
        ],
    }
    return {**raw, "data": data}


def extractors_for(
    test: Dataset, cfg: ExperimentConfig
) -> dict[FeatureScope, FeatureExtractor]:
    motions = [s.motion for s in test.samples]
    return {
        scope: fit_feature_extractor(motions, scope, cfg.evaluate.extractor)
        for scope in FeatureScope
    }


def score(
    model: DUTrans,
    test: Dataset,
    cfg: ExperimentConfig,
    extractors: dict[FeatureScope, FeatureExtractor],
    cond: ConditionBatch | None = None,
) -> MetricReport:
    diffusion = GaussianDiffusion.cosine(
        cfg.diffusion.steps, cfg.diffusion.cosine_offset
    )
    tracks = [s.audio for s in test.samples]
    clips = generate(model, diffusion, tracks, cond, seed=0, fps=test.manifest.fps)
    return evaluate_motion(
        clips, [s.motion for s in test.samples], tracks, cfg.evaluate, extractors
    )


@pytest.fixture(scope="module")
def neutral_cfg() -> ExperimentConfig:
    return experiment_from_mapping(NEUTRAL)


@pytest.fixture(scope="module")
def neutral_run(neutral_cfg: ExperimentConfig) -> TrainingRun:
    train, val, _ = split_dataset(
        experiment_dataset(neutral_cfg), neutral_cfg.split.fractions
    )
    return pretrain(
        train, neutral_cfg.model, neutral_cfg.train, neutral_cfg.diffusion, val
    )


def test_pretraining_beats_untrained_model(neutral_cfg, neutral_run):
    _, _, test = split_dataset(
        experiment_dataset(neutral_cfg), neutral_cfg.split.fractions
    )
    extractors = extractors_for(test, neutral_cfg)
    untrained = build_model(neutral_cfg.model, seed=neutral_cfg.train.seed)

    before = score(untrained, test, neutral_cfg, extractors)
    after = score(neutral_run.model, test, neutral_cfg, extractors)

    assert neutral_run.losses[-1].total < neutral_run.losses[0].total
    assert after.fmd <= 0.2 * before.fmd
    assert after.mse <= 0.2 * before.mse


def test_adapter_finetune_transfers_to_emotional_domain(neutral_run):
    cfg = experiment_from_mapping(emotional(NEUTRAL))
    train, val, test = split_dataset(experiment_dataset(cfg), cfg.split.fractions)
    extractors = extractors_for(test, cfg)

    tuned = finetune(
        neutral_run,
        train,
        cfg.finetune.peft,
        cfg.finetune.train,
        cfg.finetune.task,
        cfg.conditioning,
        validation=val,
    )
    context = ConditionContext(
        tuned.manifest.condition_task, tuned.manifest.conditioning
    )

    zero_shot = score(neutral_run.model, test, cfg, extractors)
    adapted = score(
        tuned.model, test, cfg, extractors, context.for_samples(test.samples)
    )

    assert adapted.fmd < zero_shot.fmd
    assert adapted.mse < zero_shot.mse
    assert adapted.lvd < zero_shot.lvd
    mask = tuned.manifest.frozen_mask
    assert frozen_hashes(neutral_run.model, mask) == tuned.manifest.frozen_hashes
