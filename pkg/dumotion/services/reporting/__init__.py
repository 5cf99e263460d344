"""Figures for training runs and generated motion."""

from dumotion.services.reporting.plots import (
    load_loss_curve,
    plot_loss_curves,
    plot_velocity_profiles,
)

__all__ = [
    "load_loss_curve",
    "plot_loss_curves",
    "plot_velocity_profiles",
]
