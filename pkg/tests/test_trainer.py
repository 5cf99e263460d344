"""Pretraining and finetuning loops: records, lineage, freezing and aborts."""

import math

import pytest
import torch

from dumotion.core.exceptions import (
    FrozenTensorMutatedError,
    LineageError,
    NonFiniteLossError,
)
from dumotion.core.models.motion import MotionDims
from dumotion.core.models.network import ConditionSource, PEFTConfig
from dumotion.services.data.splits import split_dataset
from dumotion.services.network.dutrans import count_parameters
from dumotion.services.peft.accounting import parameter_account
from dumotion.services.training import trainer as trainer_module
from dumotion.services.training.checkpoints import checkpoint_repository
from dumotion.services.training.trainer import finetune, fraction_subset, pretrain

from .conftest import TOY_FRACTIONS


class TestPretrain:
    def test_loss_records(self, pretrained):
        steps = [r.step for r in pretrained.losses]

        assert steps == [0, 1, 2]
        assert all(math.isfinite(r.total) for r in pretrained.losses)
        first = pretrained.losses[0]
        assert first.total == pytest.approx(
            first.holistic + 0.5 * first.face + 0.5 * first.body
        )

    def test_same_seed_same_curve(
        self,
        pretrained,
        toy_dataset,
        toy_model_config,
        short_train,
        toy_diffusion_config,
    ):
        again = pretrain(
            toy_dataset, toy_model_config, short_train, toy_diffusion_config
        )

        assert again.losses == pretrained.losses

    def test_dims_must_match(self, toy_dataset, toy_model_config, short_train):
        other = toy_model_config.model_copy(update={"dims": MotionDims()})

        with pytest.raises(LineageError):
            pretrain(toy_dataset, other, short_train)

    def test_clips_must_fit(self, toy_dataset, toy_model_config, short_train):
        short = toy_model_config.model_copy(update={"max_frames": 8})

        with pytest.raises(LineageError):
            pretrain(toy_dataset, short, short_train)

    def test_eval_snapshots(
        self, toy_dataset, toy_model_config, short_train, toy_diffusion_config
    ):
        train, val, _ = split_dataset(toy_dataset, TOY_FRACTIONS)
        cfg = short_train.model_copy(update={"iterations": 4, "eval_every": 2})

        run = pretrain(train, toy_model_config, cfg, toy_diffusion_config, val)

        assert [s.step for s in run.snapshots] == [2, 4]
        for snapshot in run.snapshots:
            assert snapshot.face_mse >= 0.0
            assert snapshot.bc is None or 0.0 <= snapshot.bc <= 1.0


class TestFractionSubset:
    def test_prefix_of_dataset(self, toy_dataset):
        half = fraction_subset(toy_dataset, 0.5)

        assert len(half) == 6
        assert half.samples[0].motion.face.tobytes() == (
            toy_dataset.samples[0].motion.face.tobytes()
        )

    def test_full_and_tiny_fractions(self, toy_dataset):
        assert fraction_subset(toy_dataset, 1.0) is toy_dataset
        assert len(fraction_subset(toy_dataset, 0.01)) == 1


class TestFinetune:
    def test_frozen_tensors_unchanged(self, pretrained, finetuned):
        parent = dict(pretrained.model.named_parameters())
        child = dict(finetuned.model.named_parameters())

        for name in finetuned.manifest.frozen_mask:
            assert torch.equal(child[name], parent[name]), name
        assert not torch.equal(child["face_head.weight"], parent["face_head.weight"])

    def test_parent_left_untouched(self, pretrained, finetuned):
        assert pretrained.model.face_encoder[0].mha_adapter is None
        assert finetuned.model.face_encoder[0].mha_adapter is not None

    def test_trainable_count(self, finetuned, toy_model_config, toy_conditioning):
        expected = parameter_account(
            toy_model_config,
            finetuned.manifest.peft,
            toy_conditioning.latent_dim,
            toy_conditioning.hidden_dim,
        )

        assert count_parameters(finetuned.model, trainable_only=True) == (
            expected.trainable
        )
        assert finetuned.manifest.peft.condition_source == ConditionSource.EMOTION

    def test_second_generation(
        self, finetuned, emotional_dataset, short_train, toy_conditioning
    ):
        grandchild = finetune(
            finetuned,
            emotional_dataset,
            PEFTConfig(rank=4),
            short_train,
            ConditionSource.EMOTION,
            toy_conditioning,
        )

        assert grandchild.manifest.parent_id == finetuned.manifest.checkpoint_id
        assert grandchild.manifest.frozen_mask == finetuned.manifest.frozen_mask
        assert grandchild.manifest.frozen_hashes == finetuned.manifest.frozen_hashes

    def test_parent_with_other_adapters(
        self, finetuned, emotional_dataset, short_train
    ):
        with pytest.raises(LineageError):
            finetune(
                finetuned,
                emotional_dataset,
                PEFTConfig(variant="lora", rank=4),
                short_train,
            )

    def test_identity_task(
        self, pretrained, toy_dataset, short_train, toy_conditioning
    ):
        child = finetune(
            pretrained,
            toy_dataset,
            PEFTConfig(rank=4),
            short_train,
            ConditionSource.IDENTITY,
            toy_conditioning,
        )

        assert sorted(child.manifest.conditioning.identities) == [
            "speaker-a",
            "speaker-b",
        ]
        assert child.model.conditioner.identity_coder is not None

    def test_frozen_mutation_is_detected(
        self, monkeypatch, pretrained, emotional_dataset, short_train, toy_conditioning
    ):
        real = trainer_module.frozen_hashes
        calls = []

        def tampered(model, mask):
            calls.append(1)
            hashes = real(model, mask)
            if len(calls) > 1:
                hashes = {name: "0" * 64 for name in hashes}
            return hashes

        monkeypatch.setattr(trainer_module, "frozen_hashes", tampered)

        with pytest.raises(FrozenTensorMutatedError) as exc:
            finetune(
                pretrained,
                emotional_dataset,
                PEFTConfig(rank=4),
                short_train,
                ConditionSource.EMOTION,
                toy_conditioning,
            )
        assert "face_in.weight" in exc.value.details["names"]


class TestNonFiniteLoss:
    def test_restores_last_good_weights(
        self,
        monkeypatch,
        tmp_path,
        toy_dataset,
        toy_model_config,
        short_train,
        toy_diffusion_config,
    ):
        real = trainer_module.loss_components
        calls = []

        def exploding(*args, **kwargs):
            calls.append(1)
            parts = real(*args, **kwargs)
            if len(calls) >= 3:
                parts["total"] = parts["total"] * float("nan")
            return parts

        monkeypatch.setattr(trainer_module, "loss_components", exploding)
        cfg = short_train.model_copy(update={"iterations": 6, "log_every": 2})
        last_good = tmp_path / "last_good"

        with pytest.raises(NonFiniteLossError) as exc:
            pretrain(
                toy_dataset,
                toy_model_config,
                cfg,
                toy_diffusion_config,
                last_good_dir=last_good,
            )

        assert exc.value.step == 2
        assert exc.value.details["last_good_checkpoint"] == str(last_good)
        saved = checkpoint_repository.load(last_good)
        assert saved.manifest.iteration == 2
        assert [r.step for r in saved.losses] == [0, 1]
        for p in saved.model.parameters():
            assert torch.isfinite(p).all()
