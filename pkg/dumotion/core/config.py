"""Configuration management using Pydantic BaseSettings and YAML experiment files."""

from functools import lru_cache
from pathlib import Path
from typing import Any, Literal, NoReturn

import yaml
from pydantic import Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from dumotion.core.exceptions import (
    ConfigParseError,
    InvalidConfigError,
    PathNotFoundError,
)
from dumotion.core.models.experiment import ExperimentConfig


class Settings(BaseSettings):
    """Process settings loaded from environment variables.

    All settings are prefixed with DUMOTION_ in environment variables.
    Example: DUMOTION_THREADS, DUMOTION_LOG_LEVEL
    """

    model_config = SettingsConfigDict(
        env_prefix="DUMOTION_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    # Application
    app_name: str = "dumotion"
    debug: bool = False
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"

    # Kernels
    threads: int = Field(default=1, ge=1, le=256, description="torch intra-op threads")
    device: str = "cpu"
    deterministic: bool = True

    @field_validator("log_level", mode="before")
    @classmethod
    def uppercase_log_level(cls, v: str) -> str:
        return v.upper() if isinstance(v, str) else v


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


settings = get_settings()


def configure_torch(current: Settings | None = None) -> None:
    """Apply thread cap and determinism switches to torch."""
    import torch

    current = current or settings
    torch.set_num_threads(current.threads)
    if current.deterministic:
        torch.use_deterministic_algorithms(True, warn_only=True)


# Experiment files


def parse_override(raw: str) -> tuple[list[str], Any]:
    """Split a ``key.path=value`` override; the value is read as a YAML scalar."""
    if "=" not in raw:
        raise ConfigParseError(f"Override '{raw}' is not of the form key=value")
    key, _, value = raw.partition("=")
    key = key.strip()
    if not key or any(not part for part in key.split(".")):
        raise ConfigParseError(f"Override '{raw}' has an empty key segment")
    try:
        parsed = yaml.safe_load(value) if value.strip() else ""
    except yaml.YAMLError as e:
        raise ConfigParseError(
            f"Override value for '{key}' is not valid YAML: {e}"
        ) from e
    return key.split("."), parsed


def set_dotted(raw: dict[str, Any], path: str, value: Any) -> dict[str, Any]:
    """Copy of ``raw`` with ``value`` stored under the dotted ``path``."""
    keys = path.split(".")
    result: dict[str, Any] = dict(raw)
    node = result
    for key in keys[:-1]:
        child = node.get(key)
        if child is None:
            child = {}
        elif not isinstance(child, dict):
            raise ConfigParseError(
                f"Override '{path}' descends into non-mapping key '{key}'"
            )
        else:
            child = dict(child)
        node[key] = child
        node = child
    node[keys[-1]] = value
    return result


def apply_overrides(raw: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Apply dotted overrides to a nested mapping; overrides win over file values."""
    result: dict[str, Any] = dict(raw)
    for override in overrides:
        keys, value = parse_override(override)
        result = set_dotted(result, ".".join(keys), value)
    return result


def load_yaml(path: Path) -> dict[str, Any]:
    """Read a YAML experiment file into a mapping."""
    if not path.is_file():
        raise PathNotFoundError(str(path), "config file")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigParseError(f"Failed to parse {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigParseError(f"Top level of {path} must be a mapping of sections")
    return data


def validation_details(error: ValidationError) -> dict[str, Any]:
    """Flatten pydantic errors into a diagnostic mapping."""
    return {
        ".".join(str(p) for p in item["loc"]): item["msg"] for item in error.errors()
    }


def raise_invalid(error: ValidationError, what: str) -> NoReturn:
    raise InvalidConfigError(f"Invalid {what}", validation_details(error)) from error


def experiment_from_mapping(
    raw: dict[str, Any], seed: int | None = None
) -> ExperimentConfig:
    """Validate a raw experiment mapping; ``seed`` replaces every section seed."""
    try:
        config = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise_invalid(e, "experiment config")
    return config if seed is None else config.with_seed(seed)


def load_experiment(
    path: Path, overrides: list[str] | None = None, seed: int | None = None
) -> tuple[ExperimentConfig, dict[str, Any]]:
    """Read, override and validate an experiment file before any compute.

    Returns the validated config and the overridden raw mapping, which
    ablation rows extend with their own overrides.
    """
    raw = apply_overrides(load_yaml(path), overrides or [])
    return experiment_from_mapping(raw, seed), raw
