"""Per-task condition inputs, rebuilt identically from a checkpoint."""

import numpy as np

from dumotion.core.exceptions import UnknownIdentityError
from dumotion.core.models.experiment import ConditioningConfig
from dumotion.core.models.motion import Dataset, Sample
from dumotion.core.models.network import ConditionSource
from dumotion.core.models.training import ConditioningState, IdentityReference
from dumotion.services.conditioning.emotion import EmotionEmbedder, EmotionSpace
from dumotion.services.conditioning.identity import reference_statistics
from dumotion.services.conditioning.projector import ConditionBatch


class ConditionContext:
    """Emotion rows and identity reference statistics for one condition task."""

    def __init__(self, task: ConditionSource, state: ConditioningState) -> None:
        self.task = task
        self.state = state
        if state.emotion_table:
            self.space = EmotionSpace.from_rows(state.emotion_table, state.emotion_seed)
        else:
            self.space = EmotionSpace(state.latent_dim, state.emotion_seed)

    @classmethod
    def build(
        cls, task: ConditionSource, dataset: Dataset, cfg: ConditioningConfig
    ) -> "ConditionContext":
        """Fix the lookup table and one reference clip per identity when needed."""
        space = EmotionSpace(cfg.latent_dim, cfg.emotion_seed)
        identities = (
            reference_statistics(dataset) if task == ConditionSource.IDENTITY else {}
        )
        state = ConditioningState(
            latent_dim=cfg.latent_dim,
            hidden_dim=cfg.hidden_dim,
            emotion_seed=cfg.emotion_seed,
            emotion_table=space.table.tolist(),
            identities=identities,
        )
        return cls(task, state)

    def embedder(self) -> EmotionEmbedder:
        return EmotionEmbedder.with_defaults(self.space)

    def reference(self, label: str) -> IdentityReference:
        if label not in self.state.identities:
            raise UnknownIdentityError(label, sorted(self.state.identities))
        return self.state.identities[label]

    def batch(
        self, identities: list[str], emotions: list[np.ndarray]
    ) -> ConditionBatch | None:
        """Condition batch from identity labels or emotion vectors, per task."""
        if self.task == ConditionSource.EMOTION:
            return ConditionBatch.from_emotion(emotions)
        if self.task == ConditionSource.IDENTITY:
            return ConditionBatch.from_identity([self.reference(i) for i in identities])
        return None

    def for_samples(self, samples: list[Sample]) -> ConditionBatch | None:
        """Conditions carried by the samples' own labels."""
        return self.batch(
            [s.identity_label for s in samples],
            [self.space.row(s.emotion_label.value) for s in samples],
        )
