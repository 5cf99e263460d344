"""Reconstruction and velocity losses, and analytic gradients of the total."""

import numpy as np
import pytest
import torch

from dumotion.core.exceptions import InvalidArgumentError, ShapeMismatchError
from dumotion.services.network.dutrans import build_model
from dumotion.services.training.losses import (
    loss_components,
    loss_simple,
    loss_velocity,
    total_loss,
)


def streams(seed=0, batch=2, frames=6, face=2, body=3):
    rng = np.random.default_rng(seed)
    face_x = rng.normal(size=(batch, frames, face))
    body_x = rng.normal(size=(batch, frames, body))
    return face_x, body_x, np.concatenate([face_x, body_x], axis=-1)


class TestLossValues:
    def test_simple_is_mean_squared_error(self):
        x0 = np.array([[0.0, 1.0], [2.0, 3.0]])
        x0_hat = np.array([[1.0, 1.0], [2.0, 1.0]])

        assert loss_simple(x0, x0_hat) == pytest.approx(5.0 / 4.0)

    def test_velocity_sums_channels_and_averages_frames(self):
        target = np.zeros((3, 2))
        prediction = np.array([[0.0, 0.0], [1.0, 2.0], [1.0, 2.0]])

        # residuals: (-1, -2) then (0, 0)
        assert loss_velocity(target, prediction) == pytest.approx(5.0 / 2.0)

    def test_constant_shift_has_no_velocity_error(self):
        target = np.arange(12, dtype=np.float64).reshape(4, 3) / 8.0

        assert loss_velocity(target, target + 0.25) == 0.0
        assert loss_simple(target, target + 0.25) == pytest.approx(0.0625)

    def test_batched_inputs_average_over_batch(self):
        target = np.zeros((2, 3, 1))
        prediction = np.zeros((2, 3, 1))
        prediction[1, 1, 0] = 2.0

        # batch 1 residuals 2 and -2 over two frames, batch 0 nothing
        assert loss_velocity(target, prediction) == pytest.approx(8.0 / 4.0)

    def test_weights_combine_streams(self):
        face, body, holistic = streams()
        zeros = np.zeros_like

        parts = loss_components(
            face, zeros(face), body, zeros(body), holistic, zeros(holistic), 0.25, 2.0
        )

        expected = parts["holistic"] + 0.25 * parts["face"] + 2.0 * parts["body"]
        assert parts["total"] == pytest.approx(expected)
        assert parts["face"] > 0 and parts["body"] > 0

    def test_perfect_prediction(self):
        face, body, holistic = streams()

        assert total_loss(face, face, body, body, holistic, holistic) == 0.0

    def test_numpy_and_torch_agree(self):
        face, body, holistic = streams(seed=1)
        face_hat, body_hat, holistic_hat = streams(seed=2)

        from_numpy = total_loss(face, face_hat, body, body_hat, holistic, holistic_hat)
        from_torch = total_loss(
            *(
                torch.from_numpy(a)
                for a in (face, face_hat, body, body_hat, holistic, holistic_hat)
            )
        )

        assert float(from_torch) == pytest.approx(float(from_numpy), rel=1e-12)


class TestLossErrors:
    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            loss_simple(np.zeros((3, 2)), np.zeros((3, 3)))

    def test_single_frame(self):
        with pytest.raises(InvalidArgumentError):
            loss_velocity(np.zeros((1, 2)), np.zeros((1, 2)))

    def test_holistic_width(self):
        face, body, _ = streams()
        wrong = np.zeros((2, 6, 4))

        with pytest.raises(ShapeMismatchError):
            loss_components(face, face, body, body, wrong, wrong)


class TestGradients:
    FAMILIES = ("face_encoder", "body_encoder", "biflow", "decoder", "head")
    EPS = 1e-5

    def test_backward_matches_central_differences(self, toy_model_config, make_inputs):
        model = build_model(toy_model_config, seed=0).double().eval()
        face_t, body_t, audio, t = make_inputs(batch=2, dtype=torch.float64)
        face, body, _, _ = make_inputs(batch=2, seed=1, dtype=torch.float64)
        holistic = torch.cat([face, body], dim=-1)

        def loss() -> torch.Tensor:
            face_hat, body_hat, holistic_hat = model(face_t, body_t, audio, t)
            return total_loss(face, face_hat, body, body_hat, holistic, holistic_hat)

        model.zero_grad()
        loss().backward()
        params = dict(model.named_parameters())
        rng = np.random.default_rng(0)

        for family in self.FAMILIES:
            entries = [
                (name, i)
                for name, p in params.items()
                if family in name.split(".")[0]
                for i in range(p.numel())
            ]
            assert entries, family
            picks = rng.choice(len(entries), size=min(40, len(entries)), replace=False)
            for k in picks:
                name, i = entries[k]
                flat = params[name].data.view(-1)
                analytic = float(params[name].grad.view(-1)[i])
                with torch.no_grad():
                    original = float(flat[i])
                    flat[i] = original + self.EPS
                    upper = float(loss())
                    flat[i] = original - self.EPS
                    lower = float(loss())
                    flat[i] = original
                numeric = (upper - lower) / (2 * self.EPS)
                tolerance = 1e-4 * max(abs(analytic), abs(numeric)) + 1e-7
                assert abs(analytic - numeric) <= tolerance, (name, i)
