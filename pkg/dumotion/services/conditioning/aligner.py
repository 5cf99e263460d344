"""Training modality encoders into the emotion lookup space."""

from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from dumotion.core.exceptions import InvalidArgumentError
from dumotion.core.logging import get_logger
from dumotion.core.models.conditioning import PromptModality
from dumotion.core.models.motion import Dataset
from dumotion.core.models.training import TrainConfig
from dumotion.services.conditioning.emotion import EmotionSpace, sequence_features

logger = get_logger(__name__)


class ModalityEncoder(nn.Module):
    """Per-frame two-layer network followed by temporal mean pooling."""

    def __init__(self, in_dim: int, latent_dim: int, hidden_dim: int = 64) -> None:
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(in_dim, hidden_dim), nn.SiLU(), nn.Linear(hidden_dim, latent_dim)
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x).mean(dim=1)


@dataclass
class AlignmentResult:
    encoder: ModalityEncoder
    losses: list[float] = field(default_factory=list)


def _features(modality: PromptModality, ds: Dataset) -> np.ndarray:
    if modality == PromptModality.AUDIO:
        return np.stack([sequence_features(s.audio) for s in ds.samples])
    if modality == PromptModality.MOTION:
        return np.stack([sequence_features(s.motion) for s in ds.samples])
    raise InvalidArgumentError(f"no modality encoder for '{modality.value}'")


def align_modality_encoder(
    modality: PromptModality | str,
    dataset: Dataset,
    space: EmotionSpace,
    train_cfg: TrainConfig,
    hidden_dim: int = 64,
) -> AlignmentResult:
    """Fit an encoder whose outputs match the lookup row of each sample's label.

    ``train_cfg.iterations`` counts full-batch Adam steps.
    """
    modality = PromptModality(modality)
    if len(dataset) == 0:
        raise InvalidArgumentError("aligner needs at least one sample")
    rows = [space.index(s.emotion_label.value) for s in dataset.samples]
    targets = torch.as_tensor(space.table[rows], dtype=torch.float32)
    x = torch.as_tensor(_features(modality, dataset), dtype=torch.float32)

    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(train_cfg.seed)
        encoder = ModalityEncoder(x.shape[-1], space.latent_dim, hidden_dim)
    optimizer = torch.optim.Adam(
        encoder.parameters(), lr=train_cfg.lr, betas=train_cfg.betas
    )

    result = AlignmentResult(encoder=encoder)
    encoder.train()
    for step in range(train_cfg.iterations):
        optimizer.zero_grad()
        loss = (1.0 - F.cosine_similarity(encoder(x), targets, dim=-1)).mean()
        loss.backward()
        optimizer.step()
        result.losses.append(float(loss))
        if (step + 1) % train_cfg.log_every == 0:
            logger.info(
                f"Aligner step {step + 1}",
                extra={"extra": {"modality": modality.value, "loss": float(loss)}},
            )
    encoder.eval()
    return result


def nearest_label_accuracy(
    encoder: ModalityEncoder,
    modality: PromptModality | str,
    dataset: Dataset,
    space: EmotionSpace,
) -> float:
    """Fraction of samples whose encoding is closest to their own label row."""
    modality = PromptModality(modality)
    x = torch.as_tensor(_features(modality, dataset), dtype=torch.float32)
    with torch.no_grad():
        z = encoder(x).double().numpy()
    hits = [
        space.nearest(z[k]) == s.emotion_label.value
        for k, s in enumerate(dataset.samples)
    ]
    return float(np.mean(hits)) if hits else 0.0
