"""Network, adapter and diffusion configuration models."""

from enum import Enum
from typing import Any

from pydantic import Field, field_validator, model_validator

from dumotion.core.exceptions import UnknownSiteError
from dumotion.core.models.base import DUMotionModel
from dumotion.core.models.motion import MotionDims


class DiffusionConfig(DUMotionModel):
    """Cosine-schedule diffusion settings."""

    steps: int = Field(default=1000, ge=2)
    cosine_offset: float = Field(default=0.008, gt=0)


class DUTransConfig(DUMotionModel):
    """Divide-and-unite transformer hyperparameters.

    ``biflow_layers`` holds 1-based encoder layer indices after which the
    face and body streams exchange information.
    """

    hidden_dim: int = Field(default=64, ge=2)
    encoder_layers: int = Field(default=3, ge=0)
    decoder_layers: int = Field(default=1, ge=0)
    n_heads: int = Field(default=4, ge=1)
    ffn_mult: int = Field(default=2, ge=1)
    biflow_layers: list[int] = Field(default_factory=lambda: [2])
    dims: MotionDims = Field(default_factory=MotionDims)
    max_frames: int = Field(default=60, ge=1)
    dropout: float = Field(default=0.1, ge=0, lt=1)

    @field_validator("biflow_layers")
    @classmethod
    def sorted_unique(cls, v: list[int]) -> list[int]:
        return sorted(set(v))

    @model_validator(mode="after")
    def consistent(self) -> "DUTransConfig":
        if self.encoder_layers + self.decoder_layers < 1:
            raise ValueError("encoder_layers + decoder_layers must be at least 1")
        if self.hidden_dim % self.n_heads:
            raise ValueError(
                f"hidden_dim {self.hidden_dim} not divisible by n_heads {self.n_heads}"
            )
        if self.hidden_dim % 2:
            raise ValueError("hidden_dim must be even for sinusoidal embeddings")
        outside = [i for i in self.biflow_layers if not 1 <= i <= self.encoder_layers]
        if outside:
            raise ValueError(
                f"biflow_layers {outside} outside 1..{self.encoder_layers}"
            )
        return self

    @property
    def ffn_dim(self) -> int:
        return self.hidden_dim * self.ffn_mult

    @classmethod
    def full_scale(cls) -> "DUTransConfig":
        return cls(
            hidden_dim=512,
            encoder_layers=7,
            decoder_layers=1,
            n_heads=8,
            biflow_layers=[3],
            dims=MotionDims.full_scale(),
            max_frames=600,
        )


class PEFTVariant(str, Enum):
    X_ADAPTER = "x_adapter"
    SERIAL_ADAPTER = "serial_adapter"
    LORA = "lora"
    PREFIX = "prefix"
    FULL = "full"


class AdapterSite(str, Enum):
    MHA = "mha"
    FFN = "ffn"


class InsertionForm(str, Enum):
    PARALLEL = "parallel"
    SERIAL = "serial"


class ConditionSource(str, Enum):
    NONE = "none"
    EMOTION = "emotion"
    IDENTITY = "identity"


class ScaleMode(str, Enum):
    """Dynamic per-token gate, fixed 1.0, or a learnable scalar."""

    DYNAMIC = "dynamic"
    FIXED = "fixed"
    LEARNED = "learned"


class ConditionMode(str, Enum):
    ADD = "add"
    STYLIZE = "stylize"
    NONE = "none"


class PrefixMode(str, Enum):
    """Separate softmax over the prefix, or prefix joined to the keys."""

    PARALLEL = "parallel"
    JOINT = "joint"


class PEFTConfig(DUMotionModel):
    """Adapter variant, placement and conditioning."""

    variant: PEFTVariant = PEFTVariant.X_ADAPTER
    rank: int = Field(default=16, ge=1)
    sites: list[AdapterSite] = Field(
        default_factory=lambda: [AdapterSite.MHA, AdapterSite.FFN]
    )
    form: InsertionForm = InsertionForm.PARALLEL
    prefix_length: int = Field(default=8, ge=1)
    prefix_mode: PrefixMode = PrefixMode.PARALLEL
    condition_source: ConditionSource = ConditionSource.NONE
    scale_mode: ScaleMode = ScaleMode.DYNAMIC
    condition_mode: ConditionMode = ConditionMode.ADD
    train_heads: bool = True

    @field_validator("sites", mode="before")
    @classmethod
    def known_sites(cls, v: Any) -> Any:
        if isinstance(v, (str, AdapterSite)):
            v = [v]
        known = {s.value for s in AdapterSite}
        for site in v:
            value = site.value if isinstance(site, AdapterSite) else str(site).lower()
            if value not in known:
                raise UnknownSiteError(str(site))
        return v

    @field_validator("sites")
    @classmethod
    def nonempty_sites(cls, v: list[AdapterSite]) -> list[AdapterSite]:
        if not v:
            raise ValueError("sites must not be empty")
        return sorted(set(v), key=lambda s: s.value)

    @model_validator(mode="before")
    @classmethod
    def serial_variant_form(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("variant") in (
            PEFTVariant.SERIAL_ADAPTER,
            PEFTVariant.SERIAL_ADAPTER.value,
        ):
            data = {**data, "form": InsertionForm.SERIAL}
        return data

    @property
    def label(self) -> str:
        return self.variant.value

    @model_validator(mode="after")
    def prefix_constraints(self) -> "PEFTConfig":
        if self.variant == PEFTVariant.PREFIX:
            if AdapterSite.MHA not in self.sites:
                raise ValueError("prefix tuning needs the mha site")
            if self.condition_mode == ConditionMode.STYLIZE:
                raise ValueError("prefix tuning supports condition_mode add or none")
        return self


class ParameterAccount(DUMotionModel):
    """Closed-form parameter counts of an (optionally adapted) DU-Trans."""

    base: int = Field(ge=0)
    heads: int = Field(ge=0)
    adapters: int = Field(default=0, ge=0)
    condition: int = Field(default=0, ge=0)
    trainable: int = Field(ge=0)

    @property
    def total(self) -> int:
        return self.base + self.adapters + self.condition

    @property
    def trainable_ratio(self) -> float:
        return self.trainable / self.total if self.total else 0.0
