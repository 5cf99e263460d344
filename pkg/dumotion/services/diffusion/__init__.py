"""Diffusion schedules, forward process and sampler."""

from dumotion.services.diffusion.gaussian import Denoiser, GaussianDiffusion
from dumotion.services.diffusion.schedule import NoiseSchedule, cosine_schedule

__all__ = [
    "Denoiser",
    "GaussianDiffusion",
    "NoiseSchedule",
    "cosine_schedule",
]
