"""Identity codes from motion variability."""

import numpy as np
import torch
from torch import nn

from dumotion.core.exceptions import InvalidArgumentError
from dumotion.core.logging import get_logger
from dumotion.core.models.motion import Dataset
from dumotion.core.models.training import IdentityReference

logger = get_logger(__name__)

MIN_FRAMES = 3


def motion_statistics(seq: np.ndarray) -> np.ndarray:
    """[std over frames, std of forward differences] per channel, ddof=1."""
    array = np.asarray(seq, dtype=np.float64)
    if array.ndim != 2 or array.shape[0] < MIN_FRAMES:
        raise InvalidArgumentError(
            f"identity statistics need an N x D matrix with N >= {MIN_FRAMES}",
            {"shape": list(array.shape)},
        )
    diffs = array[1:] - array[:-1]
    return np.concatenate([array.std(axis=0, ddof=1), diffs.std(axis=0, ddof=1)])


class IdentityCoder(nn.Module):
    """Two-layer maps from face and body statistics to identity codes."""

    def __init__(
        self, face_dim: int, body_dim: int, latent_dim: int = 32, hidden_dim: int = 64
    ) -> None:
        super().__init__()
        self.face_mlp = nn.Sequential(
            nn.Linear(2 * face_dim, hidden_dim),
            nn.SiLU(),
            nn.Linear(hidden_dim, latent_dim),
        )
        self.body_mlp = nn.Sequential(
            nn.Linear(2 * body_dim, hidden_dim),
            nn.SiLU(),
            nn.Linear(hidden_dim, latent_dim),
        )

    def forward(
        self, face_stats: torch.Tensor, body_stats: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor]:
        return self.face_mlp(face_stats), self.body_mlp(body_stats)


def identity_code(
    face: np.ndarray, body: np.ndarray, coder: IdentityCoder
) -> tuple[np.ndarray, np.ndarray]:
    """Codes for one clip, returned as float32 vectors of width d_z."""
    dtype = next(coder.parameters()).dtype
    face_stats = torch.as_tensor(motion_statistics(face), dtype=dtype)[None]
    body_stats = torch.as_tensor(motion_statistics(body), dtype=dtype)[None]
    with torch.no_grad():
        z_face, z_body = coder(face_stats, body_stats)
    return (
        z_face[0].float().numpy(),
        z_body[0].float().numpy(),
    )


def reference_statistics(ds: Dataset) -> dict[str, IdentityReference]:
    """Statistics of the first clip of each identity; reused for every input."""
    references: dict[str, IdentityReference] = {}
    for sample in ds.samples:
        label = sample.identity_label
        if label in references:
            continue
        references[label] = IdentityReference(
            face_stats=motion_statistics(sample.motion.face).tolist(),
            body_stats=motion_statistics(sample.motion.body).tolist(),
        )
    logger.debug(f"Fixed reference clips for {len(references)} identities")
    return references
