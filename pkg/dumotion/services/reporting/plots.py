"""Loss-curve and velocity-profile figures."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from dumotion.core.exceptions import (  # noqa: E402
    InvalidArgumentError,
    PathNotFoundError,
)
from dumotion.core.logging import get_logger  # noqa: E402
from dumotion.core.models.motion import MotionSequence  # noqa: E402
from dumotion.services.data.kinematics import velocity_profile  # noqa: E402
from dumotion.services.training.checkpoints import (  # noqa: E402
    LOSS_CURVE_NAME,
    read_csv,
)

logger = get_logger(__name__)

LOSS_COMPONENTS = ("holistic", "face", "body", "total")


def load_loss_curve(path: Path) -> dict[str, np.ndarray]:
    """Columns of a loss CSV, or of the one inside a checkpoint directory."""
    file = path / LOSS_CURVE_NAME if path.is_dir() else path
    if not file.is_file():
        raise PathNotFoundError(str(file), "loss curve")
    rows = read_csv(file)
    return {
        column: np.array([float(r[column]) for r in rows])
        for column in ("step", *LOSS_COMPONENTS)
    }


def plot_loss_curves(inputs: list[Path], output: Path, dpi: int = 120) -> Path:
    """One panel per loss component, one line per run."""
    if not inputs:
        raise InvalidArgumentError("loss plot needs at least one input")
    curves = {p.name or str(p): load_loss_curve(p) for p in inputs}

    fig, axes = plt.subplots(2, 2, figsize=(10, 7), sharex=True)
    for ax, component in zip(axes.flat, LOSS_COMPONENTS, strict=True):
        for name, curve in curves.items():
            ax.plot(curve["step"], curve[component], label=name)
        ax.set_title(component)
        ax.set_yscale("log")
        ax.grid(True, alpha=0.3)
    for ax in axes[1]:
        ax.set_xlabel("Step")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(output, dpi=dpi)
    plt.close(fig)

    logger.info(
        f"Wrote loss curves to {output}", extra={"extra": {"runs": len(curves)}}
    )
    return output


def plot_velocity_profiles(
    generated: MotionSequence,
    reference: MotionSequence,
    output: Path,
    dpi: int = 120,
) -> Path:
    """Ground-truth and generated velocity profiles for face and body."""
    fig, axes = plt.subplots(2, 1, figsize=(10, 6), sharex=True)
    for ax, part in zip(axes, ("face", "body"), strict=True):
        gt = velocity_profile(getattr(reference, part))
        gen = velocity_profile(getattr(generated, part))
        frames = np.arange(1, gt.shape[0] + 1)
        ax.plot(frames, gt, label="ground truth", color="black")
        ax.plot(frames, gen, label="generated", color="tab:red", alpha=0.8)
        ax.set_ylabel(f"{part} velocity")
        ax.grid(True, alpha=0.3)
    axes[0].legend(fontsize=8)
    axes[1].set_xlabel("Frame")
    fig.tight_layout()
    fig.savefig(output, dpi=dpi)
    plt.close(fig)

    logger.info(f"Wrote velocity comparison to {output}")
    return output
