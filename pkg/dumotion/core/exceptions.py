"""Custom exceptions for dumotion."""

from typing import Any


class DUMotionError(Exception):
    """Base exception for all dumotion errors."""

    exit_status: int = 1

    def __init__(
        self,
        message: str,
        code: str = "DUMOTION_ERROR",
        details: dict[str, Any] | None = None,
    ) -> None:
        self.message = message
        self.code = code
        self.details = details or {}
        super().__init__(message)

    def to_dict(self) -> dict[str, Any]:
        return {
            "error": self.code,
            "message": self.message,
            "details": self.details,
        }


# Usage Exceptions
class UsageError(DUMotionError):
    """Command line could not be interpreted."""

    exit_status = 2

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message, "USAGE_ERROR", details)


class UnknownCommandError(UsageError):
    """Command is not part of the CLI grammar."""

    def __init__(self, command: str, known: list[str]) -> None:
        super().__init__(
            f"Unknown command '{command}'",
            {"command": command, "known": known},
        )


# Configuration Exceptions
class ConfigError(DUMotionError):
    """Base configuration error."""

    exit_status = 3

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message, "CONFIG_ERROR", details)


class ConfigParseError(ConfigError):
    """Config file or override could not be parsed."""


class InvalidConfigError(ConfigError):
    """Config parsed but failed schema validation."""


# Path Exceptions
class PathError(DUMotionError):
    """Base filesystem path error."""

    exit_status = 4

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message, "PATH_ERROR", details)


class PathNotFoundError(PathError):
    """Referenced path does not exist."""

    def __init__(self, path: str, role: str) -> None:
        super().__init__(f"{role} '{path}' not found", {"path": path, "role": role})


class PathExistsError(PathError):
    """Output path already exists and would be overwritten."""

    def __init__(self, path: str) -> None:
        super().__init__(f"Output '{path}' already exists", {"path": path})


# Data Exceptions
class DataError(DUMotionError):
    """Base data and argument error."""

    exit_status = 5

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message, "DATA_ERROR", details)


class InvalidArgumentError(DataError):
    """Numeric precondition violated (step index, length, fractions)."""


class InvalidSpecError(DataError):
    """Synthetic dataset specification rejected."""


class ShapeMismatchError(DataError):
    """Array shapes disagree with each other or with a manifest."""

    def __init__(
        self,
        message: str,
        expected: tuple[int, ...] | None = None,
        actual: tuple[int, ...] | None = None,
    ) -> None:
        details: dict[str, Any] = {}
        if expected is not None:
            details["expected"] = list(expected)
        if actual is not None:
            details["actual"] = list(actual)
        super().__init__(message, details)


class TruncatedFileError(DataError):
    """Binary track file is not a whole number of float32 values."""

    def __init__(self, path: str, size_bytes: int) -> None:
        super().__init__(
            f"File '{path}' holds {size_bytes} bytes, not a multiple of 4",
            {"path": path, "size_bytes": size_bytes},
        )


class UnknownFormatVersionError(DataError):
    """Manifest declares a format this build cannot read."""

    def __init__(self, found: str, expected: str) -> None:
        super().__init__(
            f"Unknown format version '{found}' (expected '{expected}')",
            {"found": found, "expected": expected},
        )


class ManifestError(DataError):
    """Manifest missing or malformed."""


# Model Exceptions
class ModelError(DUMotionError):
    """Base model error."""

    exit_status = 6

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message, "MODEL_ERROR", details)


class InvalidModelConfigError(ModelError):
    """Model configuration violates its invariants."""


class UnknownParameterError(ModelError):
    """Parameter name does not exist on the model."""

    def __init__(self, names: list[str]) -> None:
        super().__init__(
            f"Unknown parameter names: {', '.join(names[:5])}",
            {"names": names},
        )


# PEFT Exceptions
class PEFTError(DUMotionError):
    """Base adapter injection error."""

    exit_status = 6

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message, "PEFT_ERROR", details)


class DuplicateInjectionError(PEFTError):
    """Model already carries adapters."""

    def __init__(self, existing: str) -> None:
        super().__init__(
            f"Model already injected with '{existing}' adapters",
            {"existing": existing},
        )


class UnknownSiteError(PEFTError):
    """Insertion site is not MHA or FFN."""

    def __init__(self, site: str) -> None:
        super().__init__(f"Unknown adapter site '{site}'", {"site": site})


# Conditioning Exceptions
class ConditioningError(DUMotionError):
    """Base conditioning error."""

    exit_status = 6

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message, "CONDITIONING_ERROR", details)


class UnknownEmotionError(ConditioningError):
    """Emotion label outside the lookup table."""

    def __init__(self, label: str) -> None:
        super().__init__(f"Unknown emotion '{label}'", {"label": label})


class UnknownIdentityError(ConditioningError):
    """Identity has no reference clip in the conditioning state."""

    def __init__(self, label: str, known: list[str]) -> None:
        super().__init__(
            f"Unknown identity '{label}'", {"label": label, "known": known}
        )


class UnregisteredModalityError(ConditioningError):
    """No backend registered for a prompt modality."""

    def __init__(self, modality: str) -> None:
        super().__init__(
            f"No emotion backend registered for '{modality}'",
            {"modality": modality},
        )


# Training Exceptions
class TrainingError(DUMotionError):
    """Base training error."""

    exit_status = 7

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message, "TRAINING_ERROR", details)


class NonFiniteLossError(TrainingError):
    """Loss became NaN or infinite."""

    def __init__(self, step: int, last_good: str | None) -> None:
        super().__init__(
            f"Non-finite loss at step {step}",
            {"step": step, "last_good_checkpoint": last_good},
        )
        self.step = step
        self.last_good = last_good


class LineageError(TrainingError):
    """Parent checkpoint incompatible with the requested run."""


class FrozenTensorMutatedError(TrainingError):
    """A frozen tensor changed during finetuning."""

    def __init__(self, names: list[str]) -> None:
        super().__init__(
            f"{len(names)} frozen tensors changed",
            {"names": names},
        )


# Metric Exceptions
class MetricError(DUMotionError):
    """Base metric error."""

    exit_status = 8

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message, "METRIC_ERROR", details)


class MetricUndefinedError(MetricError):
    """Metric has no value for this input (e.g. no beats detected)."""

    def __init__(self, metric: str, reason: str) -> None:
        super().__init__(
            f"{metric} undefined: {reason}",
            {"metric": metric, "reason": reason},
        )
        self.metric = metric
        self.reason = reason


class InsufficientSamplesError(MetricError):
    """Too few sequences to fit statistics."""

    def __init__(self, metric: str, count: int, minimum: int) -> None:
        super().__init__(
            f"{metric} needs at least {minimum} sequences, got {count}",
            {"metric": metric, "count": count, "minimum": minimum},
        )


class InvalidCovarianceError(MetricError):
    """Covariance is not symmetric positive semidefinite within tolerance."""

    def __init__(self, reason: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(f"Invalid covariance: {reason}", details)
