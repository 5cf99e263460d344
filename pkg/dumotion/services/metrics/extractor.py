"""Temporal-convolution autoencoder whose bottleneck feeds FMD and FGD."""

import numpy as np
import torch
from torch import nn

from dumotion.core.exceptions import InvalidArgumentError, ShapeMismatchError
from dumotion.core.logging import get_logger
from dumotion.core.models.experiment import ExtractorConfig
from dumotion.core.models.metrics import FeatureScope
from dumotion.core.models.motion import Dataset, MotionSequence
from dumotion.core.storage import hash_payload

logger = get_logger(__name__)

KERNEL = 5


def scope_columns(seq: MotionSequence, scope: FeatureScope) -> np.ndarray:
    return seq.holistic if scope == FeatureScope.HOLISTIC else seq.body


class MotionAutoencoder(nn.Module):
    def __init__(self, in_dim: int, channels: int = 64, latent_dim: int = 32) -> None:
        super().__init__()
        pad = KERNEL // 2
        self.encoder = nn.Sequential(
            nn.Conv1d(in_dim, channels, KERNEL, padding=pad),
            nn.SiLU(),
            nn.Conv1d(channels, channels, KERNEL, padding=pad),
            nn.SiLU(),
            nn.Conv1d(channels, latent_dim, KERNEL, padding=pad),
        )
        self.decoder = nn.Sequential(
            nn.Conv1d(latent_dim, channels, KERNEL, padding=pad),
            nn.SiLU(),
            nn.Conv1d(channels, channels, KERNEL, padding=pad),
            nn.SiLU(),
            nn.Conv1d(channels, in_dim, KERNEL, padding=pad),
        )

    def encode(self, x: torch.Tensor) -> torch.Tensor:
        """(B, N, D) -> bottleneck windows (B, latent, N)."""
        return self.encoder(x.transpose(1, 2))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.decoder(self.encode(x)).transpose(1, 2)


class FeatureExtractor:
    """Frozen autoencoder plus the normalization fitted on ground truth."""

    def __init__(
        self,
        scope: FeatureScope,
        autoencoder: MotionAutoencoder,
        mean: np.ndarray,
        std: np.ndarray,
        losses: list[float] | None = None,
    ) -> None:
        self.scope = scope
        self.autoencoder = autoencoder.eval()
        for p in self.autoencoder.parameters():
            p.requires_grad_(False)
        self.mean = mean.astype(np.float32)
        self.std = std.astype(np.float32)
        self.losses = losses or []

    @property
    def in_dim(self) -> int:
        return int(self.mean.shape[0])

    @property
    def hash(self) -> str:
        state = self.autoencoder.state_dict()
        return hash_payload(
            self.scope.value, self.mean, self.std, *(state[k] for k in sorted(state))
        )

    def _normalized(self, seq: MotionSequence) -> torch.Tensor:
        columns = scope_columns(seq, self.scope)
        if columns.shape[1] != self.in_dim:
            raise ShapeMismatchError(
                f"{self.scope.value} extractor expects {self.in_dim} channels",
                expected=(self.in_dim,),
                actual=(columns.shape[1],),
            )
        normalized = (columns - self.mean) / self.std
        return torch.from_numpy(normalized.astype(np.float32))[None]

    def features(self, sequences: list[MotionSequence]) -> np.ndarray:
        """One bottleneck vector per sequence, mean-pooled over windows."""
        rows = []
        with torch.no_grad():
            for seq in sequences:
                code = self.autoencoder.encode(self._normalized(seq))
                rows.append(code.mean(dim=-1)[0])
        return torch.stack(rows).double().numpy()

    def reconstruction_error(self, sequences: list[MotionSequence]) -> float:
        """Mean squared error in normalized units."""
        errors = []
        with torch.no_grad():
            for seq in sequences:
                x = self._normalized(seq)
                errors.append(float(((self.autoencoder(x) - x) ** 2).mean()))
        return float(np.mean(errors))


def fit_feature_extractor(
    gt: Dataset | list[MotionSequence],
    scope: FeatureScope | str,
    cfg: ExtractorConfig | None = None,
) -> FeatureExtractor:
    """Train the autoencoder on ground-truth clips; deterministic per (data, seed)."""
    cfg = cfg or ExtractorConfig()
    scope = FeatureScope(scope)
    sequences = [s.motion for s in gt.samples] if isinstance(gt, Dataset) else list(gt)
    if not sequences:
        raise InvalidArgumentError("feature extractor needs at least one sequence")
    lengths = {s.n_frames for s in sequences}
    if len(lengths) != 1:
        raise ShapeMismatchError(
            f"training clips must share a length, got {sorted(lengths)}"
        )

    data = np.stack([scope_columns(s, scope) for s in sequences]).astype(np.float32)
    mean = data.mean(axis=(0, 1))
    std = data.std(axis=(0, 1)) + 1e-6
    x = torch.from_numpy((data - mean) / std)

    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(cfg.seed)
        autoencoder = MotionAutoencoder(x.shape[-1], cfg.channels, cfg.latent_dim)
    optimizer = torch.optim.Adam(autoencoder.parameters(), lr=cfg.lr)

    losses = []
    autoencoder.train()
    for _ in range(cfg.epochs):
        optimizer.zero_grad()
        loss = ((autoencoder(x) - x) ** 2).mean()
        loss.backward()
        optimizer.step()
        losses.append(float(loss))

    extractor = FeatureExtractor(scope, autoencoder, mean, std, losses)
    logger.info(
        f"Fitted {scope.value} feature extractor",
        extra={
            "extra": {
                "clips": len(sequences),
                "final_loss": losses[-1],
                "hash": extractor.hash[:12],
            }
        },
    )
    return extractor
