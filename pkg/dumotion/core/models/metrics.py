"""Metric statistics and report models."""

from enum import Enum
from typing import Any

import numpy as np
from pydantic import Field, field_validator, model_validator

from dumotion.core.models.base import ArrayModel, DUMotionModel, as_vector

METRIC_NAMES: tuple[str, ...] = ("fmd", "fgd", "bc", "div", "mse", "lvd")


class FeatureScope(str, Enum):
    """Columns an extractor reads: holistic for FMD, body for FGD."""

    HOLISTIC = "holistic"
    BODY = "body"


class GaussianStats(ArrayModel):
    """Mean and covariance fitted to a set of feature vectors."""

    mean: np.ndarray
    covariance: np.ndarray
    n: int = Field(ge=1)

    @field_validator("mean", mode="before")
    @classmethod
    def finite_mean(cls, v: Any) -> np.ndarray:
        return as_vector(v, "mean")

    @field_validator("covariance", mode="before")
    @classmethod
    def finite_covariance(cls, v: Any) -> np.ndarray:
        array = np.atleast_2d(np.asarray(v, dtype=np.float64))
        if not np.all(np.isfinite(array)):
            raise ValueError("covariance contains non-finite entries")
        return array

    @model_validator(mode="after")
    def square(self) -> "GaussianStats":
        k = self.mean.shape[0]
        if self.covariance.shape != (k, k):
            raise ValueError(
                f"covariance shape {self.covariance.shape} "
                f"does not match mean width {k}"
            )
        return self

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])

    @classmethod
    def fit(cls, features: np.ndarray) -> "GaussianStats":
        """Population (ddof=0) statistics of the rows of ``features``."""
        x = np.asarray(features, dtype=np.float64)
        mean = x.mean(axis=0)
        centered = x - mean
        covariance = centered.T @ centered / x.shape[0]
        return cls(mean=mean, covariance=covariance, n=x.shape[0])


class MetricReport(DUMotionModel):
    """Evaluation outcome; a metric is either a number or listed as undefined."""

    fmd: float | None = Field(default=None, ge=0)
    fgd: float | None = Field(default=None, ge=0)
    bc: float | None = Field(default=None, ge=0, le=1)
    div: float | None = Field(default=None, ge=0)
    mse: float | None = Field(default=None, ge=0)
    lvd: float | None = Field(default=None, ge=0)
    undefined: dict[str, str] = Field(default_factory=dict)
    config_hash: str = ""
    dataset_hash: str = ""
    extractor_hash: str = ""

    @model_validator(mode="after")
    def finite_values(self) -> "MetricReport":
        for name in METRIC_NAMES:
            value = getattr(self, name)
            if value is not None and not np.isfinite(value):
                raise ValueError(f"{name} is not finite")
        return self

    def values(self) -> dict[str, float | None]:
        return {name: getattr(self, name) for name in METRIC_NAMES}

    def to_text(self) -> str:
        """Flat ``key=value`` lines; undefined metrics carry the reason."""
        lines = []
        for name, value in self.values().items():
            if value is None:
                reason = self.undefined.get(name, "not computed")
                lines.append(f"{name}=undefined ({reason})")
            else:
                lines.append(f"{name}={value:.10g}")
        lines.append(f"config_hash={self.config_hash}")
        lines.append(f"dataset_hash={self.dataset_hash}")
        lines.append(f"extractor_hash={self.extractor_hash}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MetricReport":
        fields: dict[str, Any] = {}
        undefined: dict[str, str] = {}
        for line in text.splitlines():
            if "=" not in line:
                continue
            key, _, value = line.partition("=")
            if key in METRIC_NAMES:
                if value.startswith("undefined"):
                    undefined[key] = value[len("undefined") :].strip(" ()")
                else:
                    fields[key] = float(value)
            else:
                fields[key] = value
        return cls(undefined=undefined, **fields)
