"""Diffusion pretraining and adapter finetuning loops."""

import copy
import math
from collections.abc import Callable
from pathlib import Path

import numpy as np
import torch

from dumotion.core.exceptions import (
    FrozenTensorMutatedError,
    InvalidArgumentError,
    LineageError,
    MetricUndefinedError,
    NonFiniteLossError,
)
from dumotion.core.logging import get_logger
from dumotion.core.models.experiment import ConditioningConfig
from dumotion.core.models.motion import Dataset
from dumotion.core.models.network import (
    ConditionSource,
    DiffusionConfig,
    DUTransConfig,
    PEFTConfig,
)
from dumotion.core.models.training import (
    CheckpointManifest,
    EvalSnapshot,
    LossRecord,
    Stage,
    TrainConfig,
)
from dumotion.services.conditioning.context import ConditionContext
from dumotion.services.conditioning.projector import ConditionBatch
from dumotion.services.data.batching import MotionBatch
from dumotion.services.data.repository import dataset_hash
from dumotion.services.diffusion.gaussian import GaussianDiffusion
from dumotion.services.metrics.beat import beat_consistency
from dumotion.services.metrics.reconstruction import face_mse_lvd
from dumotion.services.network.dutrans import DUTrans, build_model
from dumotion.services.peft.inject import frozen_hashes, inject_peft
from dumotion.services.training.checkpoints import (
    CheckpointRepository,
    TrainingRun,
    checkpoint_repository,
    finalize_manifest,
)
from dumotion.services.training.generation import generate
from dumotion.services.training.losses import loss_components

logger = get_logger(__name__)

EVAL_SAMPLES = 4

Evaluator = Callable[[DUTrans, int], EvalSnapshot]


def fraction_subset(dataset: Dataset, fraction: float) -> Dataset:
    """Deterministic prefix holding ``ceil(n * fraction)`` samples."""
    if fraction >= 1.0:
        return dataset
    keep = max(1, math.ceil(len(dataset) * fraction))
    return dataset.subset(list(range(keep)), split=dataset.manifest.split)


def snapshot_evaluator(
    diffusion: GaussianDiffusion,
    validation: Dataset,
    context: ConditionContext | None,
    seed: int,
    samples: int = EVAL_SAMPLES,
) -> Evaluator:
    """Face MSE and BC of clips sampled for the first validation tracks."""
    clips = validation.samples[:samples]
    cond = context.for_samples(clips) if context is not None else None

    tracks = [s.audio for s in clips]

    def evaluate(model: DUTrans, step: int) -> EvalSnapshot:
        generated = generate(model, diffusion, tracks, cond, seed=seed)
        errors = [
            face_mse_lvd(g.face, s.motion.face)[0]
            for g, s in zip(generated, clips, strict=True)
        ]
        mse = float(np.mean(errors))
        scores = []
        for g, s in zip(generated, clips, strict=True):
            try:
                scores.append(beat_consistency(g.body, s.audio.rhythm, s.motion.fps))
            except MetricUndefinedError:
                continue
        bc = float(np.mean(scores)) if scores else None
        return EvalSnapshot(step=step, face_mse=mse, bc=bc)

    return evaluate


class Trainer:
    """Optimizes the trainable parameters of one model on one dataset."""

    def __init__(
        self,
        model: DUTrans,
        diffusion: GaussianDiffusion,
        dataset: Dataset,
        cfg: TrainConfig,
        conditions: ConditionBatch | None = None,
    ) -> None:
        if len(dataset) == 0:
            raise InvalidArgumentError("training needs a non-empty dataset")
        self.model = model
        self.diffusion = diffusion
        self.cfg = cfg
        self.data = MotionBatch.from_dataset(dataset)
        self.conditions = conditions
        self.params = [p for p in model.parameters() if p.requires_grad]
        self.optimizer = torch.optim.Adam(self.params, lr=cfg.lr, betas=cfg.betas)
        self.losses: list[LossRecord] = []
        self.snapshots: list[EvalSnapshot] = []
        self.good_state: dict[str, torch.Tensor] = {}
        self.good_step = 0

    def step(self, step: int, generator: torch.Generator) -> LossRecord:
        cfg = self.cfg
        face_dim = self.model.config.dims.face
        size = min(cfg.batch_size, len(self.data))
        idx = torch.randint(len(self.data), (size,), generator=generator)
        batch = self.data.index(idx)
        cond = self.conditions.index(idx) if self.conditions is not None else None

        x0 = batch.holistic
        t = torch.randint(self.diffusion.num_timesteps, (size,), generator=generator)
        noise = torch.randn(x0.shape, generator=generator, dtype=x0.dtype)
        x_t = self.diffusion.q_sample(x0, t, noise)

        face_hat, body_hat, holistic_hat = self.model(
            x_t[..., :face_dim], x_t[..., face_dim:], batch.audio, t, cond
        )
        parts = loss_components(
            batch.face,
            face_hat,
            batch.body,
            body_hat,
            x0,
            holistic_hat,
            cfg.lambda_face,
            cfg.lambda_body,
        )
        if not torch.isfinite(parts["total"]):
            raise NonFiniteLossError(step, None)

        self.optimizer.zero_grad()
        parts["total"].backward()
        if cfg.grad_clip_norm is not None:
            torch.nn.utils.clip_grad_norm_(self.params, cfg.grad_clip_norm)
        self.optimizer.step()

        holistic, face, body = (float(parts[k]) for k in ("holistic", "face", "body"))
        return LossRecord(
            step=step,
            holistic=holistic,
            face=face,
            body=body,
            total=holistic + cfg.lambda_face * face + cfg.lambda_body * body,
        )

    def _remember_good_state(self, step: int) -> None:
        state = self.model.state_dict()
        self.good_state = {k: v.detach().clone() for k, v in state.items()}
        self.good_step = step

    def run(self, evaluate: Evaluator | None = None) -> None:
        """Run ``cfg.iterations`` steps; deterministic given ``cfg.seed``."""
        cfg = self.cfg
        generator = torch.Generator().manual_seed(cfg.seed)
        self.model.train()
        self._remember_good_state(0)
        with torch.random.fork_rng(devices=[]):
            # Dropout draws from the global generator
            torch.manual_seed(cfg.seed)
            for step in range(cfg.iterations):
                try:
                    record = self.step(step, generator)
                except NonFiniteLossError:
                    self.model.load_state_dict(self.good_state)
                    raise
                self.losses.append(record)

                done = step + 1
                if done % cfg.log_every == 0 or done == cfg.iterations:
                    self._remember_good_state(done)
                    logger.info(
                        f"Step {done}/{cfg.iterations}",
                        extra={"extra": record.model_dump()},
                    )
                due = cfg.eval_every and done % cfg.eval_every == 0
                if evaluate is not None and due:
                    snapshot = evaluate(self.model, done)
                    self.snapshots.append(snapshot)
                    logger.info(
                        f"Eval snapshot at step {done}",
                        extra={"extra": snapshot.model_dump()},
                    )
        self.model.eval()


def _abort(
    exc: NonFiniteLossError,
    trainer: Trainer,
    manifest: CheckpointManifest,
    last_good_dir: Path | None,
    repository: CheckpointRepository,
) -> NonFiniteLossError:
    """Persist the restored last-good weights and return the enriched error."""
    path = None
    if last_good_dir is not None:
        manifest = manifest.model_copy(update={"iteration": trainer.good_step})
        run = TrainingRun(
            manifest=finalize_manifest(manifest, trainer.model),
            model=trainer.model,
            losses=trainer.losses,
            snapshots=trainer.snapshots,
        )
        path = str(repository.save(run, last_good_dir, overwrite=True))
    logger.error(
        f"Non-finite loss at step {exc.step}",
        extra={"extra": {"last_good_step": trainer.good_step, "last_good": path}},
    )
    return NonFiniteLossError(exc.step, path)


def pretrain(
    dataset: Dataset,
    model_cfg: DUTransConfig,
    train_cfg: TrainConfig,
    diffusion_cfg: DiffusionConfig | None = None,
    validation: Dataset | None = None,
    last_good_dir: Path | None = None,
    repository: CheckpointRepository = checkpoint_repository,
) -> TrainingRun:
    """Train every DU-Trans weight with all three heads supervised."""
    diffusion_cfg = diffusion_cfg or DiffusionConfig()
    _check_compatible(dataset, model_cfg)
    diffusion = GaussianDiffusion.cosine(
        diffusion_cfg.steps, diffusion_cfg.cosine_offset
    )
    model = build_model(model_cfg, seed=train_cfg.seed)
    data = fraction_subset(dataset, train_cfg.data_fraction)

    manifest = CheckpointManifest(
        checkpoint_id="pending",
        stage=Stage.PRETRAIN,
        network=model_cfg,
        diffusion=diffusion_cfg,
        train=train_cfg,
        seed=train_cfg.seed,
        dataset_hash=dataset_hash(data),
    )
    trainer = Trainer(model, diffusion, data, train_cfg)
    evaluate = (
        snapshot_evaluator(diffusion, validation, None, train_cfg.seed)
        if validation is not None and len(validation)
        else None
    )
    try:
        trainer.run(evaluate)
    except NonFiniteLossError as e:
        raise _abort(e, trainer, manifest, last_good_dir, repository) from e

    manifest = manifest.model_copy(update={"iteration": train_cfg.iterations})
    return TrainingRun(
        manifest=finalize_manifest(manifest, model),
        model=model,
        losses=trainer.losses,
        snapshots=trainer.snapshots,
        optimizer_state=trainer.optimizer.state_dict(),
    )


def _check_compatible(dataset: Dataset, network: DUTransConfig) -> None:
    if dataset.manifest.dims != network.dims:
        raise LineageError(
            "Dataset dims do not match the model",
            {
                "dataset": dataset.manifest.dims.model_dump(),
                "model": network.dims.model_dump(),
            },
        )
    longest = max((s.motion.n_frames for s in dataset.samples), default=0)
    if longest > network.max_frames:
        raise LineageError(
            f"Clips of {longest} frames exceed max_frames {network.max_frames}",
            {"frames": longest, "max_frames": network.max_frames},
        )


def finetune(
    parent: TrainingRun,
    dataset: Dataset,
    peft_cfg: PEFTConfig,
    train_cfg: TrainConfig,
    condition_task: ConditionSource = ConditionSource.EMOTION,
    conditioning: ConditioningConfig | None = None,
    validation: Dataset | None = None,
    last_good_dir: Path | None = None,
    repository: CheckpointRepository = checkpoint_repository,
) -> TrainingRun:
    """Adapt a copy of ``parent`` through its adapters only.

    Frozen tensors are hashed before and after; any change aborts the run.
    """
    parent_manifest = parent.manifest
    _check_compatible(dataset, parent_manifest.network)
    peft_cfg = peft_cfg.model_copy(update={"condition_source": condition_task})
    conditioning = conditioning or ConditioningConfig()
    data = fraction_subset(dataset, train_cfg.data_fraction)

    model = copy.deepcopy(parent.model)
    if parent_manifest.peft is not None:
        if parent_manifest.peft != peft_cfg:
            raise LineageError(
                "Parent carries different adapters",
                {"parent": parent_manifest.peft.label, "requested": peft_cfg.label},
            )
        frozen = list(parent_manifest.frozen_mask)
        if parent_manifest.conditioning is not None:
            conditioning = ConditioningConfig(
                latent_dim=parent_manifest.conditioning.latent_dim,
                hidden_dim=parent_manifest.conditioning.hidden_dim,
                emotion_seed=parent_manifest.conditioning.emotion_seed,
            )
    else:
        model, frozen = inject_peft(
            model,
            peft_cfg,
            latent_dim=conditioning.latent_dim,
            coder_hidden=conditioning.hidden_dim,
            seed=train_cfg.seed,
        )

    context = ConditionContext.build(condition_task, data, conditioning)
    inherited = parent_manifest.conditioning
    if inherited is not None and inherited.identities:
        context.state.identities.update(inherited.identities)
    conditions = context.for_samples(list(data.samples))

    hashes_before = frozen_hashes(model, frozen)
    diffusion = GaussianDiffusion.cosine(
        parent_manifest.diffusion.steps, parent_manifest.diffusion.cosine_offset
    )
    manifest = CheckpointManifest(
        checkpoint_id="pending",
        parent_id=parent_manifest.checkpoint_id,
        stage=Stage.FINETUNE,
        network=parent_manifest.network,
        diffusion=parent_manifest.diffusion,
        train=train_cfg,
        peft=peft_cfg,
        condition_task=condition_task,
        conditioning=context.state,
        frozen_mask=frozen,
        frozen_hashes=hashes_before,
        seed=train_cfg.seed,
        dataset_hash=dataset_hash(data),
    )

    trainer = Trainer(model, diffusion, data, train_cfg, conditions)
    evaluate = (
        snapshot_evaluator(diffusion, validation, context, train_cfg.seed)
        if validation is not None and len(validation)
        else None
    )
    try:
        trainer.run(evaluate)
    except NonFiniteLossError as e:
        raise _abort(e, trainer, manifest, last_good_dir, repository) from e

    hashes_after = frozen_hashes(model, frozen)
    changed = sorted(n for n in frozen if hashes_after[n] != hashes_before[n])
    if changed:
        raise FrozenTensorMutatedError(changed)

    manifest = manifest.model_copy(update={"iteration": train_cfg.iterations})
    return TrainingRun(
        manifest=finalize_manifest(manifest, model),
        model=model,
        losses=trainer.losses,
        snapshots=trainer.snapshots,
        optimizer_state=trainer.optimizer.state_dict(),
    )
