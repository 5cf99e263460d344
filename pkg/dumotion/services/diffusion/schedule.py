"""Noise schedules."""

import math
from typing import Any

import numpy as np
from pydantic import Field, field_validator, model_validator

from dumotion.core.exceptions import InvalidArgumentError
from dumotion.core.models.base import ArrayModel, as_vector

BETA_MIN = 1e-8
BETA_MAX = 0.999


class NoiseSchedule(ArrayModel):
    """Per-step beta, alpha and cumulative alpha tables (float64)."""

    steps: int = Field(ge=1)
    betas: np.ndarray
    alphas: np.ndarray
    alphas_cumprod: np.ndarray

    @field_validator("betas", "alphas", "alphas_cumprod", mode="before")
    @classmethod
    def finite_vector(cls, v: Any, info: Any) -> np.ndarray:
        return as_vector(v, info.field_name)

    @model_validator(mode="after")
    def valid_tables(self) -> "NoiseSchedule":
        for name in ("betas", "alphas", "alphas_cumprod"):
            if getattr(self, name).shape != (self.steps,):
                raise ValueError(f"{name} must have length {self.steps}")
        if np.any(self.betas <= 0) or np.any(self.betas >= 1):
            raise ValueError("betas must lie strictly inside (0, 1)")
        if np.any(np.diff(self.alphas_cumprod) >= 0):
            raise ValueError("alphas_cumprod must be strictly decreasing")
        return self

    @property
    def alphas_cumprod_prev(self) -> np.ndarray:
        return np.append(1.0, self.alphas_cumprod[:-1])

    @classmethod
    def from_betas(cls, betas: np.ndarray) -> "NoiseSchedule":
        betas = np.asarray(betas, dtype=np.float64)
        alphas = 1.0 - betas
        return cls(
            steps=betas.shape[0],
            betas=betas,
            alphas=alphas,
            alphas_cumprod=np.cumprod(alphas),
        )


def cosine_schedule(steps: int, offset: float = 0.008) -> NoiseSchedule:
    """Squared-cosine schedule.

    ``f(t) = cos^2(((t / T) + s) / (1 + s) * pi / 2)``; step ``i`` targets
    ``f(i + 1) / f(0)`` and betas are clipped to ``[1e-8, 0.999]``.
    """
    if steps < 2:
        raise InvalidArgumentError(f"schedule needs at least 2 steps, got {steps}")
    if offset <= 0:
        raise InvalidArgumentError(f"cosine offset must be positive, got {offset}")

    def f(t: float) -> float:
        return math.cos((t / steps + offset) / (1 + offset) * math.pi / 2) ** 2

    target = np.array([f(i) / f(0) for i in range(steps + 1)], dtype=np.float64)
    betas = np.clip(1.0 - target[1:] / target[:-1], BETA_MIN, BETA_MAX)
    return NoiseSchedule.from_betas(betas)
