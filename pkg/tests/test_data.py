"""Motion models, synthetic generator, splits, kinematics and dataset storage."""

import json

import numpy as np
import pytest
import torch
from pydantic import ValidationError

from dumotion.core.exceptions import (
    InvalidArgumentError,
    InvalidSpecError,
    ManifestError,
    PathExistsError,
    PathNotFoundError,
    TruncatedFileError,
    UnknownFormatVersionError,
)
from dumotion.core.models.experiment import ExperimentConfig
from dumotion.core.models.motion import EmotionLabel, MotionSequence
from dumotion.services.data.batching import MotionBatch
from dumotion.services.data.kinematics import compute_velocity, velocity_profile
from dumotion.services.data.repository import (
    MANIFEST_NAME,
    dataset_hash,
    dataset_repository,
    experiment_dataset,
    track_path,
)
from dumotion.services.data.splits import select_split, split_dataset, split_sizes
from dumotion.services.data.synthetic import generate_synthetic_dataset

from .conftest import TOY_FRACTIONS


def fingerprints(ds):
    return {s.motion.face.tobytes() for s in ds.samples}


class TestMotionSequence:
    def test_holistic_is_face_then_body(self):
        seq = MotionSequence(face=np.zeros((3, 2)), body=np.ones((3, 4)))

        assert seq.holistic.shape == (3, 6)
        np.testing.assert_array_equal(seq.holistic[:, :2], 0.0)
        np.testing.assert_array_equal(seq.holistic[:, 2:], 1.0)

    def test_from_holistic_splits_columns(self):
        holistic = np.arange(12, dtype=np.float64).reshape(2, 6)

        seq = MotionSequence.from_holistic(holistic, face_dim=2, emotion_label="anger")

        np.testing.assert_array_equal(seq.face, holistic[:, :2])
        np.testing.assert_array_equal(seq.body, holistic[:, 2:])
        assert seq.emotion_label == EmotionLabel.ANGER

    @pytest.mark.parametrize(
        ("face", "body"),
        [
            (np.zeros((1, 2)), np.zeros((1, 3))),
            (np.zeros((4, 2)), np.zeros((5, 3))),
            (np.full((3, 2), np.nan), np.zeros((3, 3))),
            (np.zeros(4), np.zeros((4, 3))),
        ],
    )
    def test_rejects_invalid_tracks(self, face, body):
        with pytest.raises(ValidationError):
            MotionSequence(face=face, body=body)


class TestSyntheticGenerator:
    def test_pure_function_of_spec(self, toy_spec):
        first = generate_synthetic_dataset(toy_spec)
        second = generate_synthetic_dataset(toy_spec)

        assert dataset_hash(first) == dataset_hash(second)

    def test_seed_changes_samples(self, toy_spec):
        other = generate_synthetic_dataset(toy_spec.model_copy(update={"seed": 4}))

        assert dataset_hash(other) != dataset_hash(generate_synthetic_dataset(toy_spec))

    def test_shapes_follow_spec(self, toy_dataset, toy_dims):
        sample = toy_dataset.samples[0]

        assert len(toy_dataset) == 12
        assert sample.motion.face.shape == (12, toy_dims.face)
        assert sample.motion.body.shape == (12, toy_dims.body)
        assert sample.audio.content.shape == (12, toy_dims.content)
        assert sample.audio.rhythm.shape == (12, 1)
        assert sample.audio.semantics.shape == (12, toy_dims.semantics)

    def test_identity_cycles_fastest(self, emotional_dataset):
        labels = [
            (s.identity_label, s.emotion_label.value)
            for s in emotional_dataset.samples[:4]
        ]

        assert labels == [
            ("speaker-a", "neutral"),
            ("speaker-b", "neutral"),
            ("speaker-a", "happiness"),
            ("speaker-b", "happiness"),
        ]

    def test_emotion_shifts_coefficients(self, toy_spec, emotional_spec):
        neutral = generate_synthetic_dataset(toy_spec)
        emotional = generate_synthetic_dataset(emotional_spec)

        # Same latents for sample 0; sample 2 differs only by its emotion style
        np.testing.assert_array_equal(
            neutral.samples[0].motion.face, emotional.samples[0].motion.face
        )
        np.testing.assert_array_equal(
            neutral.samples[2].audio.content, emotional.samples[2].audio.content
        )
        assert not np.allclose(
            neutral.samples[2].motion.face, emotional.samples[2].motion.face
        )

    def test_mapping_spec_is_validated(self):
        with pytest.raises(InvalidSpecError):
            generate_synthetic_dataset({"n_samples": 0})

    def test_duplicate_identities_rejected(self):
        with pytest.raises(InvalidSpecError):
            generate_synthetic_dataset(
                {"identities": [{"label": "a"}, {"label": "a"}]}
            )


class TestSplits:
    def test_sizes_floor_val_and_test(self):
        assert split_sizes(12, TOY_FRACTIONS) == (6, 3, 3)
        assert split_sizes(200, (0.85, 0.075, 0.075)) == (170, 15, 15)
        assert split_sizes(10, (0.85, 0.075, 0.075)) == (10, 0, 0)

    def test_disjoint_and_exhaustive(self, toy_dataset):
        train, val, test = split_dataset(toy_dataset, TOY_FRACTIONS)

        parts = [fingerprints(train), fingerprints(val), fingerprints(test)]
        assert [len(p) for p in parts] == [6, 3, 3]
        assert parts[0] | parts[1] | parts[2] == fingerprints(toy_dataset)
        assert not (parts[0] & parts[1] or parts[0] & parts[2] or parts[1] & parts[2])
        assert [train.manifest.split, val.manifest.split, test.manifest.split] == [
            "train",
            "val",
            "test",
        ]

    def test_deterministic(self, toy_dataset):
        first = split_dataset(toy_dataset, TOY_FRACTIONS)
        second = split_dataset(toy_dataset, TOY_FRACTIONS)

        for a, b in zip(first, second, strict=True):
            assert dataset_hash(a) == dataset_hash(b)

    @pytest.mark.parametrize(
        "fractions", [(0.5, 0.5, 0.5), (1.2, -0.1, -0.1), (0.5, 0.5)]
    )
    def test_invalid_fractions(self, toy_dataset, fractions):
        with pytest.raises(InvalidArgumentError):
            split_dataset(toy_dataset, fractions)

    def test_select_split(self, toy_dataset):
        assert select_split(toy_dataset, "all", TOY_FRACTIONS) is toy_dataset
        assert len(select_split(toy_dataset, "test", TOY_FRACTIONS)) == 3
        with pytest.raises(InvalidArgumentError):
            select_split(toy_dataset, "holdout", TOY_FRACTIONS)


class TestKinematics:
    def test_forward_differences(self):
        seq = np.array([[0.0, 1.0], [1.0, 3.0], [3.0, 2.0]])

        np.testing.assert_array_equal(
            compute_velocity(seq), np.array([[1.0, 2.0], [2.0, -1.0]])
        )
        np.testing.assert_array_equal(velocity_profile(seq), np.array([1.5, 1.5]))

    @pytest.mark.parametrize("seq", [np.zeros((1, 3)), np.zeros(5)])
    def test_rejects_short_or_flat_input(self, seq):
        with pytest.raises(InvalidArgumentError):
            compute_velocity(seq)


class TestBatching:
    def test_stacks_samples(self, toy_dataset, toy_dims):
        batch = MotionBatch.from_dataset(toy_dataset)

        assert len(batch) == 12
        assert batch.holistic.shape == (12, 12, toy_dims.holistic)
        assert batch.face.dtype == torch.float32

        picked = batch.index(torch.tensor([3, 0]))
        assert torch.equal(
            picked.face[1], torch.from_numpy(toy_dataset.samples[0].motion.face)
        )
        assert picked.audio.n_frames == 12


class TestDatasetRepository:
    def test_save_and_load(self, tmp_path, toy_dataset):
        path = dataset_repository.save(toy_dataset, tmp_path / "ds")

        loaded = dataset_repository.load(path)

        assert loaded.manifest == toy_dataset.manifest
        assert dataset_hash(loaded) == dataset_hash(toy_dataset)
        assert loaded.samples[1].identity_label == "speaker-b"

    def test_byte_identical_directories(self, tmp_path, toy_spec):
        first = dataset_repository.save(
            generate_synthetic_dataset(toy_spec), tmp_path / "first"
        )
        second = dataset_repository.save(
            generate_synthetic_dataset(toy_spec), tmp_path / "second"
        )

        names = sorted(p.name for p in first.iterdir())
        assert names == sorted(p.name for p in second.iterdir())
        for name in names:
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_refuses_to_overwrite(self, tmp_path, toy_dataset):
        dataset_repository.save(toy_dataset, tmp_path / "ds")

        with pytest.raises(PathExistsError):
            dataset_repository.save(toy_dataset, tmp_path / "ds")

    def test_missing_directory(self, tmp_path):
        with pytest.raises(PathNotFoundError):
            dataset_repository.load(tmp_path / "absent")

    def test_unknown_format_version(self, tmp_path, toy_dataset):
        path = dataset_repository.save(toy_dataset, tmp_path / "ds")
        manifest = json.loads((path / MANIFEST_NAME).read_text())
        manifest["format_version"] = "dumotion-ds-v0"
        (path / MANIFEST_NAME).write_text(json.dumps(manifest))

        with pytest.raises(UnknownFormatVersionError):
            dataset_repository.load(path)

    def test_missing_track(self, tmp_path, toy_dataset):
        path = dataset_repository.save(toy_dataset, tmp_path / "ds")
        track_path(path, 2, "rhythm").unlink()

        with pytest.raises(ManifestError):
            dataset_repository.load(path)

    def test_truncated_track(self, tmp_path, toy_dataset):
        path = dataset_repository.save(toy_dataset, tmp_path / "ds")
        file = track_path(path, 0, "face")
        file.write_bytes(file.read_bytes()[:-2])

        with pytest.raises(TruncatedFileError):
            dataset_repository.load(path)

    def test_experiment_dataset_prefers_stored_data(self, tmp_path, toy_dataset):
        path = dataset_repository.save(toy_dataset, tmp_path / "ds")
        synthesized = ExperimentConfig.model_validate(
            {"data": {"n_samples": 3, "n_frames": 8}}
        )
        stored = synthesized.model_copy(
            update={"paths": synthesized.paths.model_copy(update={"dataset": path})}
        )

        assert len(experiment_dataset(synthesized)) == 3
        assert dataset_hash(experiment_dataset(stored)) == dataset_hash(toy_dataset)
