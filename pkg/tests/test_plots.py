"""Loss-curve and velocity-profile figures."""

import numpy as np
import pytest

from dumotion.core.exceptions import InvalidArgumentError, PathNotFoundError
from dumotion.services.reporting.plots import (
    load_loss_curve,
    plot_loss_curves,
    plot_velocity_profiles,
)
from dumotion.services.training.checkpoints import (
    LOSS_CURVE_NAME,
    checkpoint_repository,
)

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def test_loss_curve_from_checkpoint(tmp_path, pretrained):
    path = checkpoint_repository.save(pretrained, tmp_path / "ckpt")

    curve = load_loss_curve(path)

    np.testing.assert_array_equal(curve["step"], [0.0, 1.0, 2.0])
    np.testing.assert_allclose(
        curve["total"], [r.total for r in pretrained.losses], rtol=1e-12
    )


def test_loss_plot_accepts_dirs_and_files(tmp_path, pretrained, finetuned):
    parent = checkpoint_repository.save(pretrained, tmp_path / "parent")
    child = checkpoint_repository.save(finetuned, tmp_path / "child")

    out = plot_loss_curves(
        [parent, child / LOSS_CURVE_NAME], tmp_path / "loss.png", dpi=40
    )

    assert out.read_bytes().startswith(PNG_MAGIC)


def test_missing_curve(tmp_path):
    with pytest.raises(PathNotFoundError):
        load_loss_curve(tmp_path / "absent")


def test_loss_plot_needs_inputs(tmp_path):
    with pytest.raises(InvalidArgumentError):
        plot_loss_curves([], tmp_path / "loss.png")


def test_velocity_plot(tmp_path, toy_dataset):
    reference = toy_dataset.samples[0].motion
    generated = toy_dataset.samples[1].motion

    out = plot_velocity_profiles(generated, reference, tmp_path / "velocity.png", 40)

    assert out.read_bytes().startswith(PNG_MAGIC)
