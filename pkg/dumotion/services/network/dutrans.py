"""Divide-and-unite denoising transformer."""

from collections.abc import Iterable
from typing import Any

import torch
from pydantic import ValidationError
from torch import nn

from dumotion.core.config import validation_details
from dumotion.core.exceptions import (
    InvalidModelConfigError,
    ShapeMismatchError,
    UnknownParameterError,
)
from dumotion.core.logging import get_logger
from dumotion.core.models.motion import AudioFeatureTrack
from dumotion.core.models.network import DUTransConfig, PEFTConfig
from dumotion.services.data.batching import AudioBatch
from dumotion.services.network.biflow import BiFlow
from dumotion.services.network.layers import (
    DecoderLayer,
    EncoderLayer,
    sinusoidal_table,
    timestep_embedding,
)

logger = get_logger(__name__)


class DUTrans(nn.Module):
    """Face and body encoders with Bi-Flow exchange, a united decoder, three heads.

    Token 0 of each stream is the step embedding; it is dropped before the
    heads. ``conditioner`` is attached by PEFT injection and maps a condition
    batch to per-branch vectors consumed only by adapters.
    """

    def __init__(self, config: DUTransConfig) -> None:
        super().__init__()
        self.config = config
        d = config.hidden_dim
        dims = config.dims

        # Face stream: motion, content and rhythm fused in hidden space
        self.face_in = nn.Linear(dims.face, d)
        self.face_content = nn.Linear(dims.content, d)
        self.face_rhythm = nn.Linear(1, d)
        # Body stream: motion, semantics and rhythm
        self.body_in = nn.Linear(dims.body, d)
        self.body_semantics = nn.Linear(dims.semantics, d)
        self.body_rhythm = nn.Linear(1, d)

        self.time_embed = nn.Sequential(nn.Linear(d, d), nn.SiLU(), nn.Linear(d, d))
        self.register_buffer(
            "pos_table",
            sinusoidal_table(config.max_frames + 1, d).float(),
            persistent=False,
        )

        def encoder() -> nn.ModuleList:
            return nn.ModuleList(
                EncoderLayer(d, config.n_heads, config.ffn_dim, config.dropout)
                for _ in range(config.encoder_layers)
            )

        self.face_encoder = encoder()
        self.body_encoder = encoder()
        self.face_norm = nn.LayerNorm(d)
        self.body_norm = nn.LayerNorm(d)

        # Audio summary attended by the decoder
        self.audio_content = nn.Linear(dims.content, d)
        self.audio_rhythm = nn.Linear(1, d)
        self.audio_semantics = nn.Linear(dims.semantics, d)
        self.decoder = nn.ModuleList(
            DecoderLayer(d, config.n_heads, config.ffn_dim, config.dropout)
            for _ in range(config.decoder_layers)
        )
        self.decoder_norm = nn.LayerNorm(d)

        self.face_head = nn.Linear(d, dims.face)
        self.body_head = nn.Linear(d, dims.body)
        self.holistic_head = nn.Linear(d, dims.holistic)

        # Built last so the remaining weights do not depend on Bi-Flow placement
        self.biflow = nn.ModuleDict({str(i): BiFlow(d) for i in config.biflow_layers})

        self.conditioner: nn.Module | None = None
        self.peft_config: PEFTConfig | None = None

    def forward(
        self,
        face_t: torch.Tensor,
        body_t: torch.Tensor,
        audio: AudioBatch | AudioFeatureTrack,
        t: torch.Tensor | int,
        cond: Any = None,
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """Predict clean face, body and holistic motion from noisy inputs.

        Accepts batched (B, N, D) tensors or single (N, D) sequences.
        """
        single = face_t.ndim == 2
        if single:
            face_t, body_t = face_t[None], body_t[None]
        dtype = face_t.dtype
        if isinstance(audio, AudioFeatureTrack):
            audio = AudioBatch.from_tracks([audio])
        audio = audio.to(dtype)
        self._check_inputs(face_t, body_t, audio)

        batch, n_frames, _ = face_t.shape
        t = torch.as_tensor(t, dtype=torch.long)
        if t.ndim == 0:
            t = t.expand(batch)

        d = self.config.hidden_dim
        e_t = self.time_embed(timestep_embedding(t, d).to(dtype))[:, None]
        pos = self.pos_table[: n_frames + 1].to(dtype)

        face_tokens = (
            self.face_in(face_t)
            + self.face_content(audio.content)
            + self.face_rhythm(audio.rhythm)
        )
        body_tokens = (
            self.body_in(body_t)
            + self.body_semantics(audio.semantics)
            + self.body_rhythm(audio.rhythm)
        )
        f_face = torch.cat([e_t, face_tokens], dim=1) + pos
        f_body = torch.cat([e_t, body_tokens], dim=1) + pos

        c_face, c_body = None, None
        if self.conditioner is not None and cond is not None:
            c_face, c_body = self.conditioner(cond)

        for i in range(self.config.encoder_layers):
            f_face = self.face_encoder[i](f_face, c_face)
            f_body = self.body_encoder[i](f_body, c_body)
            key = str(i + 1)
            if key in self.biflow:
                f_face, f_body = self.biflow[key](f_face, f_body)

        memory = (
            self.audio_content(audio.content)
            + self.audio_rhythm(audio.rhythm)
            + self.audio_semantics(audio.semantics)
            + pos[1:]
        )
        h = f_face + f_body
        for layer in self.decoder:
            h = layer(h, memory)

        face_hat = self.face_head(self.face_norm(f_face)[:, 1:])
        body_hat = self.body_head(self.body_norm(f_body)[:, 1:])
        holistic_hat = self.holistic_head(self.decoder_norm(h)[:, 1:])
        if single:
            return face_hat[0], body_hat[0], holistic_hat[0]
        return face_hat, body_hat, holistic_hat

    def _check_inputs(
        self, face_t: torch.Tensor, body_t: torch.Tensor, audio: AudioBatch
    ) -> None:
        dims = self.config.dims
        n_frames = face_t.shape[1]
        if face_t.shape[-1] != dims.face or body_t.shape[-1] != dims.body:
            raise ShapeMismatchError(
                "motion widths do not match the model dims",
                expected=(dims.face, dims.body),
                actual=(face_t.shape[-1], body_t.shape[-1]),
            )
        frames = {n_frames, body_t.shape[1], audio.n_frames}
        if len(frames) != 1:
            raise ShapeMismatchError(
                f"input tracks disagree on frame count: {sorted(frames)}"
            )
        if n_frames > self.config.max_frames:
            raise ShapeMismatchError(
                f"{n_frames} frames exceed max_frames {self.config.max_frames}"
            )


def build_model(config: DUTransConfig | dict[str, Any], seed: int) -> DUTrans:
    """Instantiate DU-Trans with weights drawn from ``seed``."""
    if not isinstance(config, DUTransConfig):
        try:
            config = DUTransConfig.model_validate(config)
        except ValidationError as e:
            raise InvalidModelConfigError(
                "Invalid DU-Trans config", validation_details(e)
            ) from e
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        model = DUTrans(config)
    logger.debug(
        f"Built DU-Trans with {count_parameters(model)} parameters",
        extra={"extra": {"seed": seed, "hidden_dim": config.hidden_dim}},
    )
    return model


def count_parameters(
    model: nn.Module,
    trainable_only: bool = False,
    mask: Iterable[str] | None = None,
) -> int:
    """Exact element count.

    With ``trainable_only``, tensors named in ``mask`` (or with
    ``requires_grad`` off when no mask is given) are left out.
    """
    params = dict(model.named_parameters())
    frozen: set[str] | None = None
    if mask is not None:
        frozen = set(mask)
        unknown = sorted(frozen - params.keys())
        if unknown:
            raise UnknownParameterError(unknown)
    total = 0
    for name, p in params.items():
        if trainable_only:
            if frozen is not None and name in frozen:
                continue
            if frozen is None and not p.requires_grad:
                continue
        total += p.numel()
    return total
