"""Forward noising and x0-parameterized ancestral sampling."""

from collections.abc import Callable
from typing import Any

import numpy as np
import torch

from dumotion.core.exceptions import InvalidArgumentError, ShapeMismatchError
from dumotion.core.logging import get_logger
from dumotion.core.models.motion import AudioFeatureTrack, MotionSequence
from dumotion.services.data.batching import AudioBatch
from dumotion.services.diffusion.schedule import NoiseSchedule, cosine_schedule

logger = get_logger(__name__)

# (x_t face, x_t body, audio, t, cond) -> (face_hat, body_hat, holistic_hat)
Denoiser = Callable[
    [torch.Tensor, torch.Tensor, AudioBatch, torch.Tensor, Any],
    tuple[torch.Tensor, torch.Tensor, torch.Tensor],
]


def _extract_into_tensor(
    arr: np.ndarray,
    timesteps: torch.Tensor,
    broadcast_shape: torch.Size,
    dtype: torch.dtype,
) -> torch.Tensor:
    """Gather per-sample schedule values and broadcast them over trailing dims."""
    res = torch.from_numpy(arr).to(device=timesteps.device)[timesteps].to(dtype)
    while len(res.shape) < len(broadcast_shape):
        res = res[..., None]
    return res.expand(broadcast_shape)


class GaussianDiffusion:
    """Diffusion utilities over a fixed :class:`NoiseSchedule`."""

    def __init__(self, schedule: NoiseSchedule) -> None:
        self.schedule = schedule
        self.num_timesteps = schedule.steps

        alphas_cumprod = schedule.alphas_cumprod
        alphas_cumprod_prev = schedule.alphas_cumprod_prev
        self.sqrt_alphas_cumprod = np.sqrt(alphas_cumprod)
        self.sqrt_one_minus_alphas_cumprod = np.sqrt(1.0 - alphas_cumprod)

        # q(x_{t-1} | x_t, x_0)
        self.posterior_variance = (
            schedule.betas * (1.0 - alphas_cumprod_prev) / (1.0 - alphas_cumprod)
        )
        self.posterior_mean_coef1 = (
            schedule.betas * np.sqrt(alphas_cumprod_prev) / (1.0 - alphas_cumprod)
        )
        self.posterior_mean_coef2 = (
            (1.0 - alphas_cumprod_prev)
            * np.sqrt(schedule.alphas)
            / (1.0 - alphas_cumprod)
        )

    @classmethod
    def cosine(cls, steps: int = 1000, offset: float = 0.008) -> "GaussianDiffusion":
        return cls(cosine_schedule(steps, offset))

    def _timesteps(
        self, t: int | torch.Tensor, batch_shape: torch.Size, low: int = 0
    ) -> torch.Tensor:
        t_tensor = torch.as_tensor(t, dtype=torch.long)
        if t_tensor.numel() and (
            int(t_tensor.min()) < low or int(t_tensor.max()) >= self.num_timesteps
        ):
            raise InvalidArgumentError(
                f"timestep outside [{low}, {self.num_timesteps})",
                {"t": t_tensor.tolist(), "steps": self.num_timesteps},
            )
        if t_tensor.ndim == 0 and len(batch_shape) == 3:
            t_tensor = t_tensor.expand(batch_shape[0])
        return t_tensor

    def q_sample(
        self, x_start: torch.Tensor, t: int | torch.Tensor, noise: torch.Tensor
    ) -> torch.Tensor:
        """Draw x_t ~ q(x_t | x_0) with caller-supplied standard normal noise."""
        if noise.shape != x_start.shape:
            raise ShapeMismatchError(
                "noise shape differs from x0",
                expected=tuple(x_start.shape),
                actual=tuple(noise.shape),
            )
        t = self._timesteps(t, x_start.shape)
        shape, dtype = x_start.shape, x_start.dtype
        return (
            _extract_into_tensor(self.sqrt_alphas_cumprod, t, shape, dtype) * x_start
            + _extract_into_tensor(self.sqrt_one_minus_alphas_cumprod, t, shape, dtype)
            * noise
        )

    def q_posterior_mean_variance(
        self, x_start: torch.Tensor, x_t: torch.Tensor, t: int | torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor]:
        if x_start.shape != x_t.shape:
            raise ShapeMismatchError(
                "x0 prediction and x_t differ in shape",
                expected=tuple(x_t.shape),
                actual=tuple(x_start.shape),
            )
        t = self._timesteps(t, x_t.shape, low=1)
        shape, dtype = x_t.shape, x_t.dtype
        mean = (
            _extract_into_tensor(self.posterior_mean_coef1, t, shape, dtype) * x_start
            + _extract_into_tensor(self.posterior_mean_coef2, t, shape, dtype) * x_t
        )
        variance = _extract_into_tensor(self.posterior_variance, t, shape, dtype)
        return mean, variance

    def posterior_step(
        self,
        x0_hat: torch.Tensor,
        x_t: torch.Tensor,
        t: int,
        noise: torch.Tensor | None = None,
    ) -> torch.Tensor:
        """One reverse step x_t -> x_{t-1}; deterministic at t = 1."""
        if t < 1:
            raise InvalidArgumentError(
                "posterior step needs t >= 1; there is no step before t = 0", {"t": t}
            )
        mean, variance = self.q_posterior_mean_variance(x0_hat, x_t, t)
        if t == 1 or noise is None:
            return mean
        return mean + torch.sqrt(variance) * noise

    def p_sample_loop(
        self,
        denoiser: Denoiser,
        audio: AudioBatch,
        cond: Any,
        shape: tuple[int, int, int],
        face_dim: int,
        generator: torch.Generator,
        dtype: torch.dtype = torch.float32,
    ) -> torch.Tensor:
        """Run the full reverse chain and return the final holistic x0 estimate."""
        batch, n_frames, width = shape
        x_t = torch.randn(shape, generator=generator, dtype=dtype)
        x0_hat = x_t
        for t in reversed(range(self.num_timesteps)):
            t_batch = torch.full((batch,), t, dtype=torch.long)
            _, _, x0_hat = denoiser(
                x_t[..., :face_dim], x_t[..., face_dim:], audio, t_batch, cond
            )
            if x0_hat.shape[-1] != width:
                raise ShapeMismatchError(
                    f"denoiser holistic width {x0_hat.shape[-1]} != {width}",
                    expected=(batch, n_frames, width),
                    actual=tuple(x0_hat.shape),
                )
            if t == 0:
                break
            noise = torch.randn(shape, generator=generator, dtype=dtype)
            x_t = self.posterior_step(x0_hat, x_t, t, noise)
        return x0_hat

    def sample_loop(
        self,
        denoiser: Denoiser,
        audio: AudioFeatureTrack | AudioBatch,
        cond: Any,
        n_frames: int,
        seed: int,
        face_dim: int,
        holistic_dim: int,
        fps: float = 30.0,
    ) -> MotionSequence:
        """Sample one motion clip for one audio track."""
        if isinstance(audio, AudioFeatureTrack):
            audio = AudioBatch.from_tracks([audio])
        if audio.n_frames != n_frames:
            raise ShapeMismatchError(
                f"audio has {audio.n_frames} frames, requested {n_frames}"
            )
        generator = torch.Generator().manual_seed(seed)
        with torch.no_grad():
            holistic = self.p_sample_loop(
                denoiser,
                audio,
                cond,
                (1, n_frames, holistic_dim),
                face_dim,
                generator,
            )
        return MotionSequence.from_holistic(
            holistic[0].double().numpy(), face_dim=face_dim, fps=fps
        )
