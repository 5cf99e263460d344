"""Schema of the YAML experiment file."""

from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import Field, model_validator

from dumotion.core.models.base import DUMotionModel
from dumotion.core.models.motion import SyntheticSpec
from dumotion.core.models.network import (
    ConditionSource,
    DiffusionConfig,
    DUTransConfig,
    PEFTConfig,
)
from dumotion.core.models.training import Stage, TrainConfig


class PathsConfig(DUMotionModel):
    """Input and output locations; unset inputs are required per command."""

    dataset: Path | None = None
    checkpoint: Path | None = None
    generated: Path | None = None
    reference: Path | None = None
    output: Path = Path("runs/output")
    overwrite: bool = False


class SplitConfig(DUMotionModel):
    train: float = Field(default=0.85, ge=0, le=1)
    val: float = Field(default=0.075, ge=0, le=1)
    test: float = Field(default=0.075, ge=0, le=1)
    use: str = Field(default="train", description="Split consumed by training commands")

    @property
    def fractions(self) -> tuple[float, float, float]:
        return (self.train, self.val, self.test)


class ConditioningConfig(DUMotionModel):
    latent_dim: int = Field(default=32, ge=1)
    hidden_dim: int = Field(default=64, ge=1)
    emotion_seed: int = 0


class FinetuneConfig(DUMotionModel):
    peft: PEFTConfig = Field(default_factory=PEFTConfig)
    task: ConditionSource = ConditionSource.EMOTION
    train: TrainConfig = Field(default_factory=TrainConfig.finetune_defaults)


class SampleConfig(DUMotionModel):
    seed: int = 0
    split: str = "test"
    limit: int | None = Field(default=None, ge=1)
    emotion: str | None = None
    emotion_text: str | None = None
    identity: str | None = None


class ExtractorConfig(DUMotionModel):
    """Sequence autoencoder behind the feature-space distances."""

    latent_dim: int = Field(default=32, ge=1)
    channels: int = Field(default=64, ge=1)
    epochs: int = Field(default=300, ge=1)
    lr: float = Field(default=1e-3, gt=0)
    seed: int = 0


class EvaluateConfig(DUMotionModel):
    extractor: ExtractorConfig = Field(default_factory=ExtractorConfig)
    bc_sigma_seconds: float = Field(default=0.1, gt=0)
    div_pairs: int = Field(default=100, ge=1)
    seed: int = 0
    per_metric_csv: bool = True


class AblationVariant(DUMotionModel):
    """One row of the ablation grid.

    ``set`` holds dotted overrides applied to the experiment mapping
    before the row runs, e.g. ``{"finetune.peft.variant": "lora"}``.
    """

    name: str
    stage: Stage = Stage.FINETUNE
    set: dict[str, Any] = Field(default_factory=dict)


class AblateConfig(DUMotionModel):
    variants: list[AblationVariant] = Field(default_factory=list)
    groups: list[str] = Field(
        default_factory=lambda: ["adapter"],
        description="Named row groups used when no variants are listed",
    )
    workers: int = Field(default=1, ge=1)
    eval_samples: int = Field(default=8, ge=2)

    @model_validator(mode="after")
    def unique_names(self) -> "AblateConfig":
        names = [v.name for v in self.variants]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variant names: {names}")
        return self


class AblationRow(DUMotionModel):
    """One completed ablation run; metrics the run could not compute stay empty."""

    name: str
    stage: Stage
    label: str
    trainable: int = Field(ge=0)
    expected_trainable: int = Field(ge=0)
    total: int = Field(ge=0)
    final_loss: float | None = None
    fmd: float | None = None
    fgd: float | None = None
    bc: float | None = None
    div: float | None = None
    mse: float | None = None
    lvd: float | None = None
    checkpoint_id: str = ""

    @property
    def counts_match(self) -> bool:
        return self.trainable == self.expected_trainable


class PlotKind(str, Enum):
    LOSS = "loss"
    VELOCITY = "velocity"


class PlotConfig(DUMotionModel):
    kind: PlotKind = PlotKind.LOSS
    inputs: list[Path] = Field(default_factory=list)
    dpi: int = Field(default=120, ge=30)
    sample_index: int = Field(default=0, ge=0)


class ExperimentConfig(DUMotionModel):
    """All sections of an experiment file, defaults filled in."""

    paths: PathsConfig = Field(default_factory=PathsConfig)
    data: SyntheticSpec = Field(default_factory=SyntheticSpec)
    split: SplitConfig = Field(default_factory=SplitConfig)
    model: DUTransConfig = Field(default_factory=DUTransConfig)
    diffusion: DiffusionConfig = Field(default_factory=DiffusionConfig)
    conditioning: ConditioningConfig = Field(default_factory=ConditioningConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    finetune: FinetuneConfig = Field(default_factory=FinetuneConfig)
    sample: SampleConfig = Field(default_factory=SampleConfig)
    evaluate: EvaluateConfig = Field(default_factory=EvaluateConfig)
    ablate: AblateConfig = Field(default_factory=AblateConfig)
    plot: PlotConfig = Field(default_factory=PlotConfig)

    @model_validator(mode="before")
    @classmethod
    def inherit_dims(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        section = data.get("data")
        model = data.get("model") or {}
        if not isinstance(section, dict) or "dims" not in section:
            return data
        # model.dims follows data.dims unless given explicitly
        if isinstance(model, dict) and "dims" not in model:
            data = {**data, "model": {**model, "dims": section["dims"]}}
        return data

    @model_validator(mode="after")
    def model_matches_data(self) -> "ExperimentConfig":
        if self.model.dims != self.data.dims:
            raise ValueError("model.dims must equal data.dims")
        if self.model.max_frames < self.data.n_frames:
            raise ValueError(
                f"model.max_frames {self.model.max_frames} < data.n_frames "
                f"{self.data.n_frames}"
            )
        return self

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Copy with every section seed replaced."""
        data = self.model_dump()
        data["data"]["seed"] = seed
        data["train"]["seed"] = seed
        data["finetune"]["train"]["seed"] = seed
        data["sample"]["seed"] = seed
        data["evaluate"]["seed"] = seed
        data["evaluate"]["extractor"]["seed"] = seed
        return ExperimentConfig.model_validate(data)
