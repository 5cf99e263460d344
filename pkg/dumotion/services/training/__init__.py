"""Losses, training loops, sampling and checkpoint storage."""

from dumotion.services.training.checkpoints import (
    CheckpointRepository,
    TrainingRun,
    checkpoint_repository,
    finalize_manifest,
    rebuild_model,
)
from dumotion.services.training.generation import generate
from dumotion.services.training.losses import (
    loss_components,
    loss_simple,
    loss_velocity,
    total_loss,
)
from dumotion.services.training.trainer import (
    Trainer,
    finetune,
    fraction_subset,
    pretrain,
    snapshot_evaluator,
)

__all__ = [
    "CheckpointRepository",
    "TrainingRun",
    "checkpoint_repository",
    "finalize_manifest",
    "rebuild_model",
    "generate",
    "loss_components",
    "loss_simple",
    "loss_velocity",
    "total_loss",
    "Trainer",
    "finetune",
    "fraction_subset",
    "pretrain",
    "snapshot_evaluator",
]
