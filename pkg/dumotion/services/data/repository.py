"""Dataset directory storage."""

import json
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from dumotion.core.config import validation_details
from dumotion.core.exceptions import (
    ManifestError,
    PathNotFoundError,
    UnknownFormatVersionError,
)
from dumotion.core.logging import get_logger
from dumotion.core.models.experiment import ExperimentConfig
from dumotion.core.models.motion import (
    DATASET_FORMAT_VERSION,
    AudioFeatureTrack,
    Dataset,
    DatasetManifest,
    MotionSequence,
    Sample,
)
from dumotion.core.storage import atomic_directory, hash_payload, read_f32, write_f32
from dumotion.services.data.synthetic import generate_synthetic_dataset

logger = get_logger(__name__)

MANIFEST_NAME = "manifest.json"
TRACKS = ("face", "body", "content", "rhythm", "semantics")


def track_path(root: Path, index: int, track: str) -> Path:
    return root / f"sample_{index}_{track}.f32"


def read_manifest(path: Path, expected_version: str) -> dict[str, object]:
    """Load a JSON manifest and check its format version before validation."""
    if not path.is_file():
        raise ManifestError(f"Manifest '{path}' is missing", {"path": str(path)})
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ManifestError(f"Manifest '{path}' is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ManifestError(f"Manifest '{path}' must be a JSON object")
    found = data.get("format_version")
    if found != expected_version:
        raise UnknownFormatVersionError(str(found), expected_version)
    return data


class DatasetRepository:
    """Reads and writes dataset directories."""

    def save(self, ds: Dataset, path: Path, overwrite: bool = False) -> Path:
        """Write ``ds`` atomically; the directory appears only when complete."""
        with atomic_directory(path, overwrite=overwrite) as staging:
            for k, sample in enumerate(ds.samples):
                arrays = self._tracks(sample)
                for track in TRACKS:
                    write_f32(track_path(staging, k, track), arrays[track])
            (staging / MANIFEST_NAME).write_text(
                ds.manifest.model_dump_json(indent=2), encoding="utf-8"
            )

        logger.info(
            f"Saved dataset with {len(ds)} samples",
            extra={"extra": {"path": str(path), "split": ds.manifest.split}},
        )
        return path

    def load(self, path: Path) -> Dataset:
        if not path.is_dir():
            raise PathNotFoundError(str(path), "dataset directory")
        data = read_manifest(path / MANIFEST_NAME, DATASET_FORMAT_VERSION)
        try:
            manifest = DatasetManifest.model_validate(data)
        except ValidationError as e:
            raise ManifestError(
                f"Manifest in '{path}' is malformed", validation_details(e)
            ) from e

        dims = manifest.dims
        widths = {
            "face": dims.face,
            "body": dims.body,
            "content": dims.content,
            "rhythm": 1,
            "semantics": dims.semantics,
        }
        samples = []
        for record in manifest.samples:
            arrays = {}
            for track in TRACKS:
                file = track_path(path, record.index, track)
                if not file.is_file():
                    raise ManifestError(
                        f"Track file '{file.name}' listed in manifest is missing",
                        {"path": str(file)},
                    )
                arrays[track] = read_f32(file, (record.n_frames, widths[track]))
            samples.append(
                Sample(
                    motion=MotionSequence(
                        face=arrays["face"],
                        body=arrays["body"],
                        fps=manifest.fps,
                        identity_label=record.identity,
                        emotion_label=record.emotion,
                    ),
                    audio=AudioFeatureTrack(
                        content=arrays["content"],
                        rhythm=arrays["rhythm"],
                        semantics=arrays["semantics"],
                    ),
                )
            )

        logger.debug(f"Loaded dataset with {len(samples)} samples from {path}")
        return Dataset(samples=samples, manifest=manifest)

    @staticmethod
    def _tracks(sample: Sample) -> dict[str, np.ndarray]:
        return {
            "face": sample.motion.face,
            "body": sample.motion.body,
            "content": sample.audio.content,
            "rhythm": sample.audio.rhythm,
            "semantics": sample.audio.semantics,
        }


def dataset_hash(ds: Dataset) -> str:
    """Content fingerprint over the manifest and every track."""
    parts: list[object] = [ds.manifest.model_dump_json()]
    for sample in ds.samples:
        parts.extend(DatasetRepository._tracks(sample)[track] for track in TRACKS)
    return hash_payload(*parts)


# Global repository instance
dataset_repository = DatasetRepository()


def experiment_dataset(cfg: ExperimentConfig) -> Dataset:
    """The stored dataset at ``paths.dataset``, or a synthesis of ``data``."""
    if cfg.paths.dataset is not None:
        return dataset_repository.load(cfg.paths.dataset)
    return generate_synthetic_dataset(cfg.data)
