"""dumotion - co-speech holistic motion diffusion with conditional adapters."""

__version__ = "0.1.0"
