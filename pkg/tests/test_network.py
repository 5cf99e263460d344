"""DU-Trans construction, forward pass, Bi-Flow and parameter counts."""

import math

import pytest
import torch

from dumotion.core.exceptions import (
    InvalidModelConfigError,
    ShapeMismatchError,
    UnknownParameterError,
)
from dumotion.core.models.network import DUTransConfig
from dumotion.services.data.batching import AudioBatch
from dumotion.services.network.biflow import BiFlow, FlowDirection, biflow_exchange
from dumotion.services.network.dutrans import build_model, count_parameters
from dumotion.services.network.layers import (
    attend,
    prefix_attention,
    sinusoidal_table,
    timestep_embedding,
)
from dumotion.services.peft.accounting import base_parameters, head_parameters


class TestBuildModel:
    def test_seed_determines_weights(self, toy_model_config):
        a = build_model(toy_model_config, seed=5).state_dict()
        b = build_model(toy_model_config, seed=5).state_dict()
        c = build_model(toy_model_config, seed=6).state_dict()

        assert all(torch.equal(a[k], b[k]) for k in a)
        assert not all(torch.equal(a[k], c[k]) for k in a)

    def test_does_not_touch_global_rng(self, toy_model_config):
        torch.manual_seed(1)
        expected = torch.rand(1)
        torch.manual_seed(1)
        build_model(toy_model_config, seed=9)

        assert torch.equal(torch.rand(1), expected)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"hidden_dim": 15},
            {"biflow_layers": [3]},
            {"encoder_layers": 0, "decoder_layers": 0},
        ],
    )
    def test_invalid_config(self, toy_model_config, overrides):
        raw = {**toy_model_config.model_dump(), **overrides}

        with pytest.raises(InvalidModelConfigError):
            build_model(raw, seed=0)

    def test_count_matches_closed_form(self, toy_model_config):
        model = build_model(toy_model_config, seed=0)

        assert count_parameters(model) == base_parameters(toy_model_config)

    @pytest.mark.parametrize("biflow", [[], [1], [1, 2]])
    def test_biflow_count(self, toy_model_config, biflow):
        cfg = toy_model_config.model_copy(update={"biflow_layers": biflow})

        assert count_parameters(build_model(cfg, seed=0)) == base_parameters(cfg)

    def test_full_scale_total(self):
        cfg = DUTransConfig.full_scale()

        assert 30e6 <= base_parameters(cfg) <= 50e6
        assert head_parameters(cfg) == pytest.approx(0.27e6, rel=0.02)


class TestForward:
    def test_batched_shapes(self, toy_model, make_inputs, toy_dims):
        face, body, audio, t = make_inputs(batch=3)

        face_hat, body_hat, holistic_hat = toy_model(face, body, audio, t)

        assert face_hat.shape == (3, 12, toy_dims.face)
        assert body_hat.shape == (3, 12, toy_dims.body)
        assert holistic_hat.shape == (3, 12, toy_dims.holistic)

    def test_single_sequence(self, toy_model, make_track, toy_dims):
        face = torch.randn(12, toy_dims.face)
        body = torch.randn(12, toy_dims.body)

        face_hat, body_hat, holistic_hat = toy_model(face, body, make_track(), 3)

        assert face_hat.shape == (12, toy_dims.face)
        assert holistic_hat.shape == (12, toy_dims.holistic)

    def test_fewer_frames_than_maximum(self, toy_model, make_inputs):
        face, body, audio, t = make_inputs(frames=5)

        _, _, holistic_hat = toy_model(face, body, audio, t)

        assert holistic_hat.shape[1] == 5

    def test_step_changes_prediction(self, toy_model, make_inputs):
        face, body, audio, _ = make_inputs()

        with torch.no_grad():
            early = toy_model(face, body, audio, 1)[2]
            late = toy_model(face, body, audio, 900)[2]

        assert not torch.allclose(early, late)

    def test_frame_order_matters(self, toy_model, make_inputs):
        face, body, audio, t = make_inputs(batch=1)
        perm = torch.arange(face.shape[1] - 1, -1, -1)
        shuffled = AudioBatch(
            content=audio.content[:, perm],
            rhythm=audio.rhythm[:, perm],
            semantics=audio.semantics[:, perm],
        )

        with torch.no_grad():
            out = toy_model(face, body, audio, t)
            out_shuffled = toy_model(face[:, perm], body[:, perm], shuffled, t)

        for a, b in zip(out_shuffled, out, strict=True):
            assert not torch.allclose(a, b[:, perm], atol=1e-5)

    def test_too_many_frames(self, toy_model, make_inputs):
        face, body, audio, t = make_inputs(frames=13)

        with pytest.raises(ShapeMismatchError):
            toy_model(face, body, audio, t)

    def test_motion_width_checked(self, toy_model, make_inputs):
        face, body, audio, t = make_inputs()

        with pytest.raises(ShapeMismatchError):
            toy_model(face[..., :2], body, audio, t)


class TestCountParameters:
    def test_mask_excludes_frozen(self, toy_model):
        names = [n for n, _ in toy_model.named_parameters()]
        total = count_parameters(toy_model)

        assert count_parameters(toy_model, trainable_only=True, mask=[]) == total
        assert count_parameters(toy_model, trainable_only=True, mask=names) == 0
        head = toy_model.face_head.weight.numel() + toy_model.face_head.bias.numel()
        assert (
            count_parameters(
                toy_model,
                trainable_only=True,
                mask=["face_head.weight", "face_head.bias"],
            )
            == total - head
        )

    def test_unknown_mask_names(self, toy_model):
        with pytest.raises(UnknownParameterError):
            count_parameters(toy_model, trainable_only=True, mask=["nope.weight"])


class TestBiFlow:
    def test_fresh_block_passes_streams_through(self):
        block = BiFlow(8)
        face, body = torch.randn(2, 5, 8), torch.randn(2, 5, 8)

        face_new, body_new = biflow_exchange(face, body, block)

        assert torch.equal(face_new, face)
        assert torch.equal(body_new, body)

    def test_streams_read_each_other(self):
        torch.manual_seed(0)
        block = BiFlow(8)
        for direction in (block.face_to_body, block.body_to_face):
            torch.nn.init.normal_(direction.mlp[2].weight)
        face, body = torch.randn(1, 5, 8), torch.randn(1, 5, 8)

        face_a, _ = block(face, body)
        face_b, _ = block(face, body + 1.0)

        assert not torch.allclose(face_a, face_b)

    def test_cross_attention_matches_loops(self):
        torch.manual_seed(3)
        direction = FlowDirection(4)
        source, dest = torch.randn(1, 3, 4), torch.randn(1, 3, 4)

        with torch.no_grad():
            actual = direction.cross(source, dest)[0]
            q = direction.q_proj(dest)[0].tolist()
            k = direction.k_proj(source)[0].tolist()
            v = direction.v_proj(source)[0].tolist()

        expected = []
        for qi in q:
            scores = [
                sum(a * b for a, b in zip(qi, kj, strict=True)) / math.sqrt(4)
                for kj in k
            ]
            weights = [math.exp(s - max(scores)) for s in scores]
            total = sum(weights)
            expected.append(
                [
                    sum(w * vj[c] for w, vj in zip(weights, v, strict=True)) / total
                    for c in range(4)
                ]
            )

        torch.testing.assert_close(actual, torch.tensor(expected), atol=1e-6, rtol=0)

    def test_fresh_block_leaves_model_unchanged(self, toy_model_config, make_inputs):
        plain = toy_model_config.model_copy(update={"biflow_layers": []})
        without = build_model(plain, seed=0).eval()
        with_block = build_model(toy_model_config, seed=0).eval()
        with_block.load_state_dict(without.state_dict(), strict=False)
        face, body, audio, t = make_inputs()

        with torch.no_grad():
            expected = without(face, body, audio, t)
            actual = with_block(face, body, audio, t)

        for a, b in zip(actual, expected, strict=True):
            assert torch.equal(a, b)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            biflow_exchange(torch.zeros(1, 5, 8), torch.zeros(1, 4, 8), BiFlow(8))


class TestLayers:
    def test_timestep_embedding(self):
        emb = timestep_embedding(torch.tensor([0, 7]), 6)

        assert emb.shape == (2, 6)
        assert torch.equal(emb[0, :3], torch.ones(3, dtype=emb.dtype))
        assert torch.equal(emb[0, 3:], torch.zeros(3, dtype=emb.dtype))

    def test_positional_table(self):
        assert sinusoidal_table(10, 4).shape == (10, 4)

    def test_parallel_prefix_with_zero_values(self):
        q, k, v = (torch.randn(1, 2, 5, 4) for _ in range(3))
        prefix_k, prefix_v = torch.randn(1, 2, 3, 4), torch.zeros(1, 2, 3, 4)

        out = prefix_attention(q, k, v, prefix_k, prefix_v)

        assert torch.equal(out, attend(q, k, v))

    def test_joint_prefix_dilutes_attention(self):
        q, k, v = (torch.randn(1, 2, 5, 4) for _ in range(3))
        zeros = torch.zeros(1, 2, 3, 4)

        joint = prefix_attention(q, k, v, zeros, zeros, joint=True)

        assert joint.shape == (1, 2, 5, 4)
        assert not torch.allclose(joint, attend(q, k, v))
