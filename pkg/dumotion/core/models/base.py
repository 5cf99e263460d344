"""Base model configuration."""

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict


class DUMotionModel(BaseModel):
    """Base model with common configuration."""

    model_config = ConfigDict(
        from_attributes=True,
        str_strip_whitespace=True,
        validate_assignment=True,
        populate_by_name=True,
        extra="forbid",
    )


class ArrayModel(BaseModel):
    """Model carrying numpy arrays; arrays are validated by field validators."""

    model_config = ConfigDict(
        arbitrary_types_allowed=True,
        frozen=True,
    )


def as_matrix(value: Any, name: str, dtype: type = np.float32) -> np.ndarray:
    """Coerce to a finite 2-D array or raise ValueError (surfaced by pydantic)."""
    array = np.asarray(value, dtype=dtype)
    if array.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{name} contains non-finite entries")
    return array


def as_vector(value: Any, name: str, dtype: type = np.float64) -> np.ndarray:
    array = np.asarray(value, dtype=dtype)
    if array.ndim != 1:
        raise ValueError(f"{name} must be a vector, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{name} contains non-finite entries")
    return array
