"""Ablation runner: one training run per variant, aggregated into a table."""

import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from dumotion.core.config import configure_torch, experiment_from_mapping, set_dotted
from dumotion.core.exceptions import LineageError, PathExistsError
from dumotion.core.logging import get_logger, set_log_context, setup_logging
from dumotion.core.models.experiment import (
    AblationRow,
    AblationVariant,
    ExperimentConfig,
)
from dumotion.core.models.metrics import FeatureScope, MetricReport
from dumotion.core.models.motion import Dataset
from dumotion.core.models.training import Stage
from dumotion.services.ablation.grid import default_grid
from dumotion.services.conditioning.context import ConditionContext
from dumotion.services.data.repository import dataset_hash, experiment_dataset
from dumotion.services.data.splits import split_dataset
from dumotion.services.diffusion.gaussian import GaussianDiffusion
from dumotion.services.metrics.extractor import FeatureExtractor, fit_feature_extractor
from dumotion.services.metrics.report import evaluate_motion
from dumotion.services.peft.accounting import parameter_account
from dumotion.services.training.checkpoints import (
    TrainingRun,
    checkpoint_repository,
    write_csv,
)
from dumotion.services.training.generation import generate
from dumotion.services.training.trainer import finetune, pretrain

logger = get_logger(__name__)

TABLE_CSV = "ablation.csv"
TABLE_MARKDOWN = "ablation.md"
PARENT_DIR = "parent"
VARIANTS_DIR = "variants"


@dataclass(frozen=True)
class AblationJob:
    """Everything a worker process needs to run one row."""

    variant: AblationVariant
    raw: dict[str, Any]
    seed: int | None
    parent: Path | None
    output: Path
    extractors: dict[FeatureScope, FeatureExtractor]
    eval_samples: int


def evaluate_run(
    run: TrainingRun,
    reference: Dataset,
    cfg: ExperimentConfig,
    extractors: dict[FeatureScope, FeatureExtractor] | None = None,
    limit: int | None = None,
) -> MetricReport:
    """Sample one clip per reference track and score it against the reference."""
    count = len(reference) if limit is None else min(limit, len(reference))
    reference = reference.subset(list(range(count)), reference.manifest.split)
    clips = list(reference.samples)
    manifest = run.manifest
    cond = None
    if manifest.conditioning is not None:
        context = ConditionContext(manifest.condition_task, manifest.conditioning)
        cond = context.for_samples(clips)
    diffusion = GaussianDiffusion.cosine(
        manifest.diffusion.steps, manifest.diffusion.cosine_offset
    )
    tracks = [s.audio for s in clips]
    generated = generate(
        run.model,
        diffusion,
        tracks,
        cond,
        seed=cfg.sample.seed,
        fps=reference.manifest.fps,
    )
    return evaluate_motion(
        generated,
        [s.motion for s in clips],
        tracks,
        cfg.evaluate,
        extractors,
        dataset_hash(reference),
    )


def run_variant(job: AblationJob) -> AblationRow:
    """Train, store and score one variant."""
    variant = job.variant
    set_log_context(variant=variant.name)
    raw = job.raw
    for key, value in variant.set.items():
        raw = set_dotted(raw, key, value)
    cfg = experiment_from_mapping(raw, job.seed)
    train, val, test = split_dataset(experiment_dataset(cfg), cfg.split.fractions)

    if variant.stage == Stage.PRETRAIN:
        run = pretrain(train, cfg.model, cfg.train, cfg.diffusion, validation=val)
        expected = parameter_account(cfg.model)
    else:
        if job.parent is None:
            raise LineageError("Finetune rows need a parent checkpoint")
        parent = checkpoint_repository.load(job.parent)
        run = finetune(
            parent,
            train,
            cfg.finetune.peft,
            cfg.finetune.train,
            cfg.finetune.task,
            cfg.conditioning,
            validation=val,
        )
        state = run.manifest.conditioning
        expected = parameter_account(
            run.manifest.network,
            run.manifest.peft,
            latent_dim=state.latent_dim if state else cfg.conditioning.latent_dim,
            coder_hidden=state.hidden_dim if state else cfg.conditioning.hidden_dim,
        )
    checkpoint_repository.save(
        run, job.output / VARIANTS_DIR / variant.name, overwrite=cfg.paths.overwrite
    )

    report = evaluate_run(run, test, cfg, job.extractors, job.eval_samples)
    trainable = sum(p.numel() for p in run.model.parameters() if p.requires_grad)
    row = AblationRow(
        name=variant.name,
        stage=variant.stage,
        label=run.manifest.peft.label if run.manifest.peft else "pretrain",
        trainable=trainable,
        expected_trainable=expected.trainable,
        total=expected.total,
        final_loss=run.losses[-1].total if run.losses else None,
        checkpoint_id=run.manifest.checkpoint_id,
        **report.values(),
    )
    if not row.counts_match:
        logger.warning(
            f"Trainable count of {variant.name} differs from the closed form",
            extra={"extra": {"trainable": trainable, "expected": expected.trainable}},
        )
    logger.info(f"Finished variant {variant.name}", extra={"extra": row.model_dump()})
    return row


def _init_worker() -> None:
    setup_logging()
    configure_torch()


def write_table(rows: list[AblationRow], output: Path) -> Path:
    """CSV and Markdown renderings of the rows; returns the CSV path."""
    columns = (*AblationRow.model_fields, "counts_match")
    records = [
        {**row.model_dump(mode="json"), "counts_match": row.counts_match}
        for row in rows
    ]
    write_csv(output / TABLE_CSV, columns, records)

    def cell(value: Any) -> str:
        if value is None:
            return "-"
        if isinstance(value, float):
            return f"{value:.4g}"
        return str(value)

    lines = [
        "| " + " | ".join(columns) + " |",
        "|" + "---|" * len(columns),
        *("| " + " | ".join(cell(r[c]) for c in columns) + " |" for r in records),
    ]
    (output / TABLE_MARKDOWN).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return output / TABLE_CSV


def run_ablation(
    cfg: ExperimentConfig,
    raw: dict[str, Any],
    output: Path,
    seed: int | None = None,
    parent: Path | None = None,
) -> list[AblationRow]:
    """Run the listed variants, or the rows of ``ablate.groups`` when none are listed.

    Finetune rows share one parent: ``parent`` when given, otherwise a model
    pretrained here from the base config. Feature extractors are fitted once
    on the base test split so every row is scored in the same feature space.
    """
    variants = cfg.ablate.variants or default_grid(cfg.ablate.groups)
    if (output / TABLE_CSV).exists() and not cfg.paths.overwrite:
        raise PathExistsError(str(output / TABLE_CSV))
    output.mkdir(parents=True, exist_ok=True)

    train, val, test = split_dataset(experiment_dataset(cfg), cfg.split.fractions)
    motions = [s.motion for s in test.samples[: cfg.ablate.eval_samples]]
    extractors = {
        scope: fit_feature_extractor(motions, scope, cfg.evaluate.extractor)
        for scope in FeatureScope
    }

    if parent is None and any(v.stage == Stage.FINETUNE for v in variants):
        set_log_context(variant=PARENT_DIR)
        base = pretrain(train, cfg.model, cfg.train, cfg.diffusion, validation=val)
        parent = checkpoint_repository.save(
            base, output / PARENT_DIR, overwrite=cfg.paths.overwrite
        )

    jobs = [
        AblationJob(
            variant=v,
            raw=raw,
            seed=seed,
            parent=parent,
            output=output,
            extractors=extractors,
            eval_samples=cfg.ablate.eval_samples,
        )
        for v in variants
    ]
    logger.info(
        f"Running {len(jobs)} ablation variants",
        extra={"extra": {"workers": cfg.ablate.workers}},
    )
    if cfg.ablate.workers == 1:
        rows = [run_variant(job) for job in jobs]
    else:
        with ProcessPoolExecutor(
            max_workers=cfg.ablate.workers,
            mp_context=multiprocessing.get_context("spawn"),
            initializer=_init_worker,
        ) as pool:
            rows = list(pool.map(run_variant, jobs))

    path = write_table(rows, output)
    logger.info(
        f"Wrote ablation table to {path}", extra={"extra": {"rows": len(rows)}}
    )
    return rows
