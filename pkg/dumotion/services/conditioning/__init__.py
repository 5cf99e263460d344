"""Identity and emotion conditioning."""

from dumotion.services.conditioning.aligner import (
    AlignmentResult,
    ModalityEncoder,
    align_modality_encoder,
    nearest_label_accuracy,
)
from dumotion.services.conditioning.context import ConditionContext
from dumotion.services.conditioning.emotion import (
    EmotionBackend,
    EmotionEmbedder,
    EmotionSpace,
    LookupBackend,
    SequenceBackend,
    TextBackend,
    emotion_embed,
)
from dumotion.services.conditioning.identity import (
    IdentityCoder,
    identity_code,
    motion_statistics,
    reference_statistics,
)
from dumotion.services.conditioning.projector import ConditionBatch, ConditionProjector

__all__ = [
    "AlignmentResult",
    "ModalityEncoder",
    "align_modality_encoder",
    "nearest_label_accuracy",
    "ConditionContext",
    "EmotionBackend",
    "EmotionEmbedder",
    "EmotionSpace",
    "LookupBackend",
    "SequenceBackend",
    "TextBackend",
    "emotion_embed",
    "IdentityCoder",
    "identity_code",
    "motion_statistics",
    "reference_statistics",
    "ConditionBatch",
    "ConditionProjector",
]
