"""Training configuration, loss records and checkpoint manifests."""

from datetime import datetime, timezone
from enum import Enum

from pydantic import Field, model_validator

from dumotion.core.models.base import DUMotionModel
from dumotion.core.models.network import (
    ConditionSource,
    DiffusionConfig,
    DUTransConfig,
    PEFTConfig,
)

CHECKPOINT_FORMAT_VERSION = "dumotion-ckpt-v1"


class TrainConfig(DUMotionModel):
    """Optimizer and loop settings shared by pretraining and finetuning."""

    lr: float = Field(default=1e-4, gt=0)
    betas: tuple[float, float] = (0.9, 0.99)
    batch_size: int = Field(default=16, ge=1)
    iterations: int = Field(default=2000, ge=0)
    lambda_face: float = Field(default=0.5, ge=0)
    lambda_body: float = Field(default=0.5, ge=0)
    seed: int = 0
    log_every: int = Field(default=100, ge=1)
    eval_every: int = Field(default=0, ge=0, description="0 disables eval snapshots")
    grad_clip_norm: float | None = Field(default=None, gt=0)
    data_fraction: float = Field(default=1.0, gt=0, le=1)

    @classmethod
    def finetune_defaults(cls, **overrides: object) -> "TrainConfig":
        return cls.model_validate({"lr": 1e-3, "iterations": 500, **overrides})


class Stage(str, Enum):
    PRETRAIN = "pretrain"
    FINETUNE = "finetune"


class LossRecord(DUMotionModel):
    """Loss components of one optimizer step."""

    step: int = Field(ge=0)
    holistic: float
    face: float
    body: float
    total: float


class EvalSnapshot(DUMotionModel):
    """Validation metrics recorded during finetuning."""

    step: int = Field(ge=0)
    face_mse: float
    bc: float | None = None


class IdentityReference(DUMotionModel):
    """Motion statistics of the fixed reference clip of one identity."""

    face_stats: list[float]
    body_stats: list[float]


class ConditioningState(DUMotionModel):
    """Everything besides weights needed to rebuild condition vectors."""

    latent_dim: int = Field(default=32, ge=1)
    hidden_dim: int = Field(default=64, ge=1)
    emotion_seed: int = 0
    emotion_table: list[list[float]] = Field(default_factory=list)
    identities: dict[str, IdentityReference] = Field(default_factory=dict)


class CheckpointManifest(DUMotionModel):
    """Description of a stored checkpoint and its lineage."""

    format_version: str = CHECKPOINT_FORMAT_VERSION
    checkpoint_id: str
    parent_id: str | None = None
    stage: Stage = Stage.PRETRAIN
    network: DUTransConfig
    diffusion: DiffusionConfig = Field(default_factory=DiffusionConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    peft: PEFTConfig | None = None
    condition_task: ConditionSource = ConditionSource.NONE
    conditioning: ConditioningState | None = None
    frozen_mask: list[str] = Field(default_factory=list)
    frozen_hashes: dict[str, str] = Field(default_factory=dict)
    tensors: dict[str, list[int]] = Field(default_factory=dict)
    seed: int = 0
    iteration: int = 0
    dataset_hash: str = ""
    created_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))

    @model_validator(mode="after")
    def finetune_lineage(self) -> "CheckpointManifest":
        if self.stage == Stage.FINETUNE and not self.parent_id:
            raise ValueError("finetune checkpoints must reference a parent")
        return self
