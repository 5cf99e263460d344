"""Cosine schedule, forward marginal and the reverse chain."""

import numpy as np
import pytest
import torch

from dumotion.core.exceptions import InvalidArgumentError, ShapeMismatchError
from dumotion.services.diffusion.gaussian import GaussianDiffusion
from dumotion.services.diffusion.schedule import cosine_schedule


class TestCosineSchedule:
    def test_tables_are_valid(self):
        schedule = cosine_schedule(1000)

        assert schedule.steps == 1000
        assert np.all((schedule.betas > 0) & (schedule.betas < 1))
        assert np.all(np.diff(schedule.alphas_cumprod) < 0)
        assert schedule.betas[0] < 1e-3
        assert schedule.betas[-1] == pytest.approx(0.999)
        assert schedule.alphas_cumprod[-1] < 1e-3
        assert schedule.alphas_cumprod_prev[0] == 1.0

    def test_matches_closed_form(self):
        steps, s = 50, 0.008
        schedule = cosine_schedule(steps, s)

        def f(t):
            return np.cos((t / steps + s) / (1 + s) * np.pi / 2) ** 2

        t = 20
        assert schedule.alphas_cumprod[t] == pytest.approx(f(t + 1) / f(0), rel=1e-9)

    @pytest.mark.parametrize(("steps", "offset"), [(1, 0.008), (10, 0.0)])
    def test_rejects_degenerate_arguments(self, steps, offset):
        with pytest.raises(InvalidArgumentError):
            cosine_schedule(steps, offset)


class TestForwardProcess:
    def test_marginal_matches_closed_form(self):
        diffusion = GaussianDiffusion.cosine(1000)
        draws, t = 10_000, 500
        x0_row = torch.tensor([0.5, -1.0, 2.0], dtype=torch.float64)
        x0 = x0_row.expand(draws, 1, 3).clone()
        noise = torch.randn(
            x0.shape, generator=torch.Generator().manual_seed(0), dtype=torch.float64
        )

        x_t = diffusion.q_sample(x0, t, noise)[:, 0, :].numpy()

        alpha_bar = diffusion.schedule.alphas_cumprod[t]
        mean = np.sqrt(alpha_bar) * x0_row.numpy()
        variance = 1.0 - alpha_bar
        standard_error = np.sqrt(variance / draws)
        assert np.all(np.abs(x_t.mean(axis=0) - mean) < 4 * standard_error)
        assert np.all(np.abs(x_t.var(axis=0) / variance - 1.0) < 0.05)

    def test_per_sample_steps(self):
        diffusion = GaussianDiffusion.cosine(10)
        x0 = torch.ones(2, 3, 1, dtype=torch.float64)
        noise = torch.zeros_like(x0)

        x_t = diffusion.q_sample(x0, torch.tensor([0, 9]), noise)

        expected = np.sqrt(diffusion.schedule.alphas_cumprod[[0, 9]])
        np.testing.assert_allclose(x_t[:, 0, 0].numpy(), expected)

    def test_noise_shape_must_match(self):
        diffusion = GaussianDiffusion.cosine(10)

        with pytest.raises(ShapeMismatchError):
            diffusion.q_sample(torch.zeros(1, 4, 2), 3, torch.zeros(1, 4, 3))

    @pytest.mark.parametrize("t", [-1, 10])
    def test_step_out_of_range(self, t):
        diffusion = GaussianDiffusion.cosine(10)

        with pytest.raises(InvalidArgumentError):
            diffusion.q_sample(torch.zeros(1, 4, 2), t, torch.zeros(1, 4, 2))


class TestReverseProcess:
    def test_posterior_mean(self):
        diffusion = GaussianDiffusion.cosine(10)
        schedule = diffusion.schedule
        x0 = torch.full((1, 2, 3), 0.7, dtype=torch.float64)
        x_t = torch.full((1, 2, 3), -0.4, dtype=torch.float64)
        t = 4

        step = diffusion.posterior_step(x0, x_t, t)

        beta, alpha_bar = schedule.betas[t], schedule.alphas_cumprod[t]
        alpha_bar_prev = schedule.alphas_cumprod[t - 1]
        mean = (
            beta * np.sqrt(alpha_bar_prev) / (1 - alpha_bar) * 0.7
            + (1 - alpha_bar_prev) * np.sqrt(1 - beta) / (1 - alpha_bar) * -0.4
        )
        np.testing.assert_allclose(step.numpy(), mean, rtol=1e-12)

    def test_last_step_is_deterministic(self):
        diffusion = GaussianDiffusion.cosine(10)
        x0 = torch.randn(1, 3, 2, dtype=torch.float64)
        x_t = torch.randn(1, 3, 2, dtype=torch.float64)

        noisy = diffusion.posterior_step(x0, x_t, 1, torch.randn_like(x_t))

        assert torch.equal(noisy, diffusion.posterior_step(x0, x_t, 1))

    def test_no_step_before_zero(self):
        diffusion = GaussianDiffusion.cosine(10)
        x = torch.zeros(1, 2, 2)

        with pytest.raises(InvalidArgumentError):
            diffusion.posterior_step(x, x, 0)

    def test_chain_visits_every_step_once(self, make_track):
        diffusion = GaussianDiffusion.cosine(6)
        seen = []

        def denoiser(face, body, audio, t, cond):
            seen.append(int(t[0]))
            holistic = torch.cat([face, body], dim=-1)
            return face, body, 0.5 * holistic

        clip = diffusion.sample_loop(
            denoiser, make_track(frames=5), None, 5, seed=0, face_dim=2, holistic_dim=5
        )

        assert seen == [5, 4, 3, 2, 1, 0]
        assert clip.face.shape == (5, 2)
        assert clip.body.shape == (5, 3)

    def test_same_seed_same_clip(self, make_track):
        diffusion = GaussianDiffusion.cosine(6)
        track = make_track(frames=5)

        def denoiser(face, body, audio, t, cond):
            return face, body, 0.9 * torch.cat([face, body], dim=-1)

        def run(seed):
            return diffusion.sample_loop(
                denoiser, track, None, 5, seed=seed, face_dim=2, holistic_dim=5
            )

        np.testing.assert_array_equal(run(1).holistic, run(1).holistic)
        assert not np.allclose(run(1).holistic, run(2).holistic)

    def test_audio_length_must_match(self, make_track):
        diffusion = GaussianDiffusion.cosine(6)

        with pytest.raises(ShapeMismatchError):
            diffusion.sample_loop(
                lambda *args: args, make_track(frames=5), None, 7, 0, 2, 5
            )
