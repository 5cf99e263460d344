"""Checkpoint directories: float32 weights, manifest, optimizer state, curves."""

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import torch
from pydantic import ValidationError

from dumotion.core.config import validation_details
from dumotion.core.exceptions import ManifestError, PathNotFoundError
from dumotion.core.logging import get_logger
from dumotion.core.models.training import (
    CHECKPOINT_FORMAT_VERSION,
    CheckpointManifest,
    EvalSnapshot,
    LossRecord,
)
from dumotion.core.storage import atomic_directory, hash_payload, read_f32, write_f32
from dumotion.services.data.repository import MANIFEST_NAME, read_manifest
from dumotion.services.network.dutrans import DUTrans, build_model
from dumotion.services.peft.inject import apply_frozen_mask, inject_peft

logger = get_logger(__name__)

WEIGHTS_DIR = "weights"
OPTIMIZER_NAME = "optimizer.pt"
LOSS_CURVE_NAME = "loss_curve.csv"
EVAL_SNAPSHOTS_NAME = "eval_snapshots.csv"
LOSS_COLUMNS = ("step", "holistic", "face", "body", "total")
SNAPSHOT_COLUMNS = ("step", "face_mse", "bc")


@dataclass
class TrainingRun:
    """A model with its manifest and training history."""

    manifest: CheckpointManifest
    model: DUTrans
    losses: list[LossRecord] = field(default_factory=list)
    snapshots: list[EvalSnapshot] = field(default_factory=list)
    optimizer_state: dict[str, Any] | None = None
    path: Path | None = None


def weight_arrays(model: DUTrans) -> dict[str, np.ndarray]:
    return {
        name: tensor.detach().cpu().float().numpy()
        for name, tensor in model.state_dict().items()
    }


def checkpoint_id(manifest: CheckpointManifest, model: DUTrans) -> str:
    """Content id over the manifest (minus id and timestamp) and the weights."""
    described = manifest.model_dump_json(exclude={"checkpoint_id", "created_at"})
    weights = weight_arrays(model)
    return hash_payload(described, *(weights[name] for name in sorted(weights)))[:16]


def finalize_manifest(
    manifest: CheckpointManifest, model: DUTrans
) -> CheckpointManifest:
    """Fill the tensor index and the content id."""
    tensors = {name: list(array.shape) for name, array in weight_arrays(model).items()}
    manifest = manifest.model_copy(update={"tensors": tensors, "checkpoint_id": ""})
    return manifest.model_copy(update={"checkpoint_id": checkpoint_id(manifest, model)})


def rebuild_model(manifest: CheckpointManifest) -> DUTrans:
    """Architecture described by ``manifest``, adapters included, weights unset."""
    model = build_model(manifest.network, seed=manifest.seed)
    if manifest.peft is not None:
        cond = manifest.conditioning
        inject_peft(
            model,
            manifest.peft,
            latent_dim=cond.latent_dim if cond else 32,
            coder_hidden=cond.hidden_dim if cond else 64,
            seed=manifest.seed,
        )
    apply_frozen_mask(model, manifest.frozen_mask)
    return model


class CheckpointRepository:
    """Reads and writes checkpoint directories."""

    def save(self, run: TrainingRun, path: Path, overwrite: bool = False) -> Path:
        with atomic_directory(path, overwrite=overwrite) as staging:
            weights = staging / WEIGHTS_DIR
            weights.mkdir()
            for name, array in weight_arrays(run.model).items():
                write_f32(weights / f"{name}.f32", array)
            if run.optimizer_state is not None:
                torch.save(run.optimizer_state, staging / OPTIMIZER_NAME)
            write_csv(
                staging / LOSS_CURVE_NAME,
                LOSS_COLUMNS,
                [r.model_dump() for r in run.losses],
            )
            if run.snapshots:
                write_csv(
                    staging / EVAL_SNAPSHOTS_NAME,
                    SNAPSHOT_COLUMNS,
                    [s.model_dump() for s in run.snapshots],
                )
            (staging / MANIFEST_NAME).write_text(
                run.manifest.model_dump_json(indent=2), encoding="utf-8"
            )

        run.path = path
        logger.info(
            f"Saved checkpoint {run.manifest.checkpoint_id}",
            extra={
                "extra": {
                    "path": str(path),
                    "stage": run.manifest.stage.value,
                    "iteration": run.manifest.iteration,
                }
            },
        )
        return path

    def load_manifest(self, path: Path) -> CheckpointManifest:
        if not path.is_dir():
            raise PathNotFoundError(str(path), "checkpoint directory")
        data = read_manifest(path / MANIFEST_NAME, CHECKPOINT_FORMAT_VERSION)
        try:
            return CheckpointManifest.model_validate(data)
        except ValidationError as e:
            raise ManifestError(
                f"Checkpoint manifest in '{path}' is malformed", validation_details(e)
            ) from e

    def load(self, path: Path) -> TrainingRun:
        manifest = self.load_manifest(path)
        model = rebuild_model(manifest)

        expected = set(model.state_dict())
        if set(manifest.tensors) != expected:
            missing = sorted(expected - set(manifest.tensors))
            extra = sorted(set(manifest.tensors) - expected)
            raise ManifestError(
                "Checkpoint tensors do not match the described architecture",
                {"missing": missing, "unexpected": extra},
            )
        state = {}
        for name, shape in manifest.tensors.items():
            file = path / WEIGHTS_DIR / f"{name}.f32"
            if not file.is_file():
                raise ManifestError(
                    f"Weight file '{file.name}' listed in manifest is missing",
                    {"path": str(file)},
                )
            state[name] = torch.from_numpy(read_f32(file, tuple(shape)))
        model.load_state_dict(state)

        optimizer_state = None
        if (path / OPTIMIZER_NAME).is_file():
            optimizer_state = torch.load(path / OPTIMIZER_NAME, weights_only=True)
        rows = read_csv(path / LOSS_CURVE_NAME)
        losses = [LossRecord.model_validate(row) for row in rows]
        snapshots = [
            EvalSnapshot.model_validate({**row, "bc": row["bc"] or None})
            for row in read_csv(path / EVAL_SNAPSHOTS_NAME)
        ]
        logger.debug(f"Loaded checkpoint {manifest.checkpoint_id} from {path}")
        return TrainingRun(
            manifest=manifest,
            model=model,
            losses=losses,
            snapshots=snapshots,
            optimizer_state=optimizer_state,
            path=path,
        )


def write_csv(path: Path, columns: tuple[str, ...], rows: list[dict[str, Any]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if row.get(k) is None else row[k] for k in columns})


def read_csv(path: Path) -> list[dict[str, str]]:
    if not path.is_file():
        return []
    with path.open(newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


# Global repository instance
checkpoint_repository = CheckpointRepository()
