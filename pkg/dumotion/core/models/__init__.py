"""Shared Pydantic models."""

from dumotion.core.models.conditioning import (
    ConditionEmbedding,
    EmotionPrompt,
    PromptModality,
    Provenance,
)
from dumotion.core.models.experiment import (
    AblateConfig,
    AblationRow,
    AblationVariant,
    ConditioningConfig,
    EvaluateConfig,
    ExperimentConfig,
    ExtractorConfig,
    FinetuneConfig,
    PathsConfig,
    PlotConfig,
    PlotKind,
    SampleConfig,
    SplitConfig,
)
from dumotion.core.models.metrics import (
    METRIC_NAMES,
    FeatureScope,
    GaussianStats,
    MetricReport,
)
from dumotion.core.models.motion import (
    EMOTION_LABELS,
    AudioFeatureTrack,
    Dataset,
    DatasetManifest,
    EmotionLabel,
    EmotionStyle,
    IdentityStyle,
    MotionDims,
    MotionSequence,
    Sample,
    SampleRecord,
    SyntheticSpec,
)
from dumotion.core.models.network import (
    AdapterSite,
    ConditionMode,
    ConditionSource,
    DiffusionConfig,
    DUTransConfig,
    InsertionForm,
    PEFTConfig,
    PEFTVariant,
    ParameterAccount,
    PrefixMode,
    ScaleMode,
)
from dumotion.core.models.training import (
    CheckpointManifest,
    ConditioningState,
    EvalSnapshot,
    IdentityReference,
    LossRecord,
    Stage,
    TrainConfig,
)

__all__ = [
    # Motion
    "EMOTION_LABELS",
    "AudioFeatureTrack",
    "Dataset",
    "DatasetManifest",
    "EmotionLabel",
    "EmotionStyle",
    "IdentityStyle",
    "MotionDims",
    "MotionSequence",
    "Sample",
    "SampleRecord",
    "SyntheticSpec",
    # Network
    "AdapterSite",
    "ConditionMode",
    "ConditionSource",
    "DiffusionConfig",
    "DUTransConfig",
    "InsertionForm",
    "PEFTConfig",
    "PEFTVariant",
    "ParameterAccount",
    "PrefixMode",
    "ScaleMode",
    # Conditioning
    "ConditionEmbedding",
    "EmotionPrompt",
    "PromptModality",
    "Provenance",
    # Training
    "CheckpointManifest",
    "ConditioningState",
    "EvalSnapshot",
    "IdentityReference",
    "LossRecord",
    "Stage",
    "TrainConfig",
    # Metrics
    "METRIC_NAMES",
    "FeatureScope",
    "GaussianStats",
    "MetricReport",
    # Experiment
    "AblateConfig",
    "AblationRow",
    "AblationVariant",
    "ConditioningConfig",
    "EvaluateConfig",
    "ExperimentConfig",
    "ExtractorConfig",
    "FinetuneConfig",
    "PathsConfig",
    "PlotConfig",
    "PlotKind",
    "SampleConfig",
    "SplitConfig",
]
