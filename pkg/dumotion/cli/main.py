"""Command-line entry point.

Usage: dumotion <command> --config <path> [--seed N] [--set key=value]...
"""

import argparse
import json
import sys
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any, NoReturn

from dumotion.core.config import configure_torch, load_experiment
from dumotion.core.exceptions import (
    DUMotionError,
    PathExistsError,
    PathNotFoundError,
    UnknownCommandError,
    UnknownEmotionError,
    UsageError,
)
from dumotion.core.logging import get_logger, set_log_context, setup_logging
from dumotion.core.models.conditioning import EmotionPrompt
from dumotion.core.models.experiment import ExperimentConfig, PlotKind
from dumotion.core.models.motion import EMOTION_LABELS, Dataset, EmotionLabel, Sample
from dumotion.core.storage import atomic_directory, generate_id
from dumotion.services.ablation.harness import run_ablation
from dumotion.services.conditioning.context import ConditionContext
from dumotion.services.conditioning.emotion import TextBackend
from dumotion.services.data.repository import (
    dataset_hash,
    dataset_repository,
    experiment_dataset,
)
from dumotion.services.data.splits import select_split, split_dataset
from dumotion.services.data.synthetic import generate_synthetic_dataset
from dumotion.services.diffusion.gaussian import GaussianDiffusion
from dumotion.services.metrics.report import evaluate_motion
from dumotion.services.reporting.plots import plot_loss_curves, plot_velocity_profiles
from dumotion.services.training.checkpoints import checkpoint_repository, write_csv
from dumotion.services.training.generation import generate
from dumotion.services.training.trainer import finetune, pretrain

logger = get_logger(__name__)

DATASET_DIR = "dataset"
CHECKPOINT_DIR = "checkpoint"
LAST_GOOD_DIR = "last_good"
GENERATED_DIR = "generated"
REFERENCE_DIR = "reference"
REPORT_DIR = "report"
ABLATION_DIR = "ablation"
METRICS_TEXT = "metrics.txt"
METRICS_CSV = "metrics.csv"


@dataclass(frozen=True)
class Invocation:
    """A parsed command line with its validated experiment config."""

    command: str
    cfg: ExperimentConfig
    raw: dict[str, Any]
    seed: int | None

    @property
    def output(self) -> Path:
        return self.cfg.paths.output


class ArgumentParser(argparse.ArgumentParser):
    """Raises usage errors instead of exiting."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(message, {"usage": self.format_usage().strip()})


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="dumotion",
        description="Co-speech holistic motion diffusion experiments",
    )
    parser.add_argument("command", help=f"one of: {', '.join(COMMANDS)}")
    parser.add_argument(
        "--config", type=Path, required=True, help="YAML experiment file"
    )
    parser.add_argument("--seed", type=int, default=None, help="replaces every seed")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="dotted override, e.g. train.lr=0.001 (repeatable)",
    )
    parser.add_argument(
        "--eval-every",
        type=int,
        default=None,
        help="finetune: record validation face MSE and BC every N steps",
    )
    return parser


def require(path: Path | None, role: str) -> Path:
    if path is None or not path.exists():
        raise PathNotFoundError(str(path) if path is not None else "<unset>", role)
    return path


def _fresh(path: Path, overwrite: bool) -> Path:
    if path.exists() and not overwrite:
        raise PathExistsError(str(path))
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _training_splits(cfg: ExperimentConfig) -> tuple[Dataset, Dataset | None]:
    ds = experiment_dataset(cfg)
    fractions = cfg.split.fractions
    if cfg.split.use == "train":
        train, val, _ = split_dataset(ds, fractions)
        return train, val
    return select_split(ds, cfg.split.use, fractions), None


# Command handlers


def synth_data(inv: Invocation) -> Path:
    ds = generate_synthetic_dataset(inv.cfg.data)
    return dataset_repository.save(
        ds, inv.output / DATASET_DIR, overwrite=inv.cfg.paths.overwrite
    )


def pretrain_command(inv: Invocation) -> Path:
    cfg = inv.cfg
    target = _fresh(inv.output / CHECKPOINT_DIR, cfg.paths.overwrite)
    if cfg.paths.dataset is not None:
        require(cfg.paths.dataset, "dataset directory")
    train, val = _training_splits(cfg)
    run = pretrain(
        train,
        cfg.model,
        cfg.train,
        cfg.diffusion,
        validation=val,
        last_good_dir=inv.output / LAST_GOOD_DIR,
    )
    return checkpoint_repository.save(run, target, overwrite=cfg.paths.overwrite)


def finetune_command(inv: Invocation) -> Path:
    cfg = inv.cfg
    target = _fresh(inv.output / CHECKPOINT_DIR, cfg.paths.overwrite)
    parent_path = require(cfg.paths.checkpoint, "parent checkpoint")
    if cfg.paths.dataset is not None:
        require(cfg.paths.dataset, "dataset directory")
    parent = checkpoint_repository.load(parent_path)
    train, val = _training_splits(cfg)
    run = finetune(
        parent,
        train,
        cfg.finetune.peft,
        cfg.finetune.train,
        cfg.finetune.task,
        cfg.conditioning,
        validation=val,
        last_good_dir=inv.output / LAST_GOOD_DIR,
    )
    return checkpoint_repository.save(run, target, overwrite=cfg.paths.overwrite)


def sample_command(inv: Invocation) -> Path:
    """Generate motion for the audio of one split, optionally under a prompt.

    The ground-truth clips of the same tracks are stored next to the output
    so ``evaluate`` can pair them clip by clip.
    """
    cfg = inv.cfg
    opts = cfg.sample
    reference_target = _fresh(inv.output / REFERENCE_DIR, cfg.paths.overwrite)
    generated_target = _fresh(inv.output / GENERATED_DIR, cfg.paths.overwrite)
    run = checkpoint_repository.load(require(cfg.paths.checkpoint, "checkpoint"))
    ds = select_split(experiment_dataset(cfg), opts.split, cfg.split.fractions)
    samples = list(ds.samples[: opts.limit])
    if not samples:
        raise UsageError(f"Split '{opts.split}' has no samples to condition on")

    emotions = [s.emotion_label for s in samples]
    identities = [opts.identity or s.identity_label for s in samples]
    if opts.emotion_text is not None:
        emotions = [EmotionLabel(TextBackend.parse(opts.emotion_text))] * len(samples)
    elif opts.emotion is not None:
        if opts.emotion not in EMOTION_LABELS:
            raise UnknownEmotionError(opts.emotion)
        emotions = [EmotionLabel(opts.emotion)] * len(samples)

    cond = None
    manifest = run.manifest
    if manifest.conditioning is not None:
        context = ConditionContext(manifest.condition_task, manifest.conditioning)
        embedder = context.embedder()
        vectors = [embedder.embed(EmotionPrompt.lookup(e.value)) for e in emotions]
        cond = context.batch(identities, vectors)

    diffusion = GaussianDiffusion.cosine(
        manifest.diffusion.steps, manifest.diffusion.cosine_offset
    )
    generated = generate(
        run.model,
        diffusion,
        [s.audio for s in samples],
        cond,
        seed=opts.seed,
        fps=ds.manifest.fps,
        identity_labels=identities,
        emotion_labels=emotions,
    )
    pairs = zip(generated, samples, strict=True)
    out = Dataset.from_samples(
        [Sample(motion=g, audio=s.audio) for g, s in pairs],
        dims=ds.manifest.dims,
        fps=ds.manifest.fps,
        seed=opts.seed,
        split=GENERATED_DIR,
    )
    reference = ds.subset(list(range(len(samples))), REFERENCE_DIR)
    overwrite = cfg.paths.overwrite
    dataset_repository.save(reference, reference_target, overwrite=overwrite)
    return dataset_repository.save(out, generated_target, overwrite=overwrite)


def evaluate_command(inv: Invocation) -> Path:
    """Score clip k of the generated set against clip k of the reference set."""
    cfg = inv.cfg
    generated_path = require(cfg.paths.generated, "generated motion directory")
    reference_path = require(cfg.paths.reference, "reference motion directory")
    target = _fresh(inv.output / REPORT_DIR, cfg.paths.overwrite)
    generated = dataset_repository.load(generated_path)
    reference = dataset_repository.load(reference_path)

    report = evaluate_motion(
        [s.motion for s in generated.samples],
        [s.motion for s in reference.samples],
        [s.audio for s in reference.samples],
        cfg.evaluate,
        dataset_hash=dataset_hash(reference),
    )
    with atomic_directory(target, overwrite=cfg.paths.overwrite) as staging:
        (staging / METRICS_TEXT).write_text(report.to_text(), encoding="utf-8")
        if cfg.evaluate.per_metric_csv:
            write_csv(
                staging / METRICS_CSV,
                ("metric", "value", "undefined"),
                [
                    {"metric": k, "value": v, "undefined": report.undefined.get(k)}
                    for k, v in report.values().items()
                ],
            )
    return target / METRICS_TEXT


def ablate_command(inv: Invocation) -> Path:
    cfg = inv.cfg
    parent = None
    if cfg.paths.checkpoint is not None:
        parent = require(cfg.paths.checkpoint, "parent checkpoint")
    if cfg.paths.dataset is not None:
        require(cfg.paths.dataset, "dataset directory")
    target = inv.output / ABLATION_DIR
    run_ablation(cfg, inv.raw, target, seed=inv.seed, parent=parent)
    return target


def plot_command(inv: Invocation) -> Path:
    """Loss curves of checkpoint dirs, or GT-vs-generated velocity profiles.

    Velocity plots read ``paths.generated`` and ``paths.reference``.
    """
    cfg = inv.cfg
    opts = cfg.plot
    target = _fresh(inv.output / f"{opts.kind.value}.png", cfg.paths.overwrite)
    if opts.kind == PlotKind.LOSS:
        inputs = [require(p, "loss curve input") for p in opts.inputs]
        if not inputs:
            raise UsageError("plot.inputs must list at least one run for loss curves")
        return plot_loss_curves(inputs, target, opts.dpi)

    generated_path = require(cfg.paths.generated, "generated motion directory")
    reference_path = require(cfg.paths.reference, "reference motion directory")
    generated = dataset_repository.load(generated_path)
    reference = dataset_repository.load(reference_path)
    k = opts.sample_index
    if k >= min(len(generated), len(reference)):
        raise UsageError(f"plot.sample_index {k} is outside the stored clips")
    return plot_velocity_profiles(
        generated.samples[k].motion, reference.samples[k].motion, target, opts.dpi
    )


COMMANDS: dict[str, Callable[[Invocation], Path]] = {
    "synth-data": synth_data,
    "pretrain": pretrain_command,
    "finetune": finetune_command,
    "sample": sample_command,
    "evaluate": evaluate_command,
    "ablate": ablate_command,
    "plot": plot_command,
}


def parse(argv: list[str]) -> Invocation:
    """Parse and validate everything a command needs before it computes."""
    args = build_parser().parse_args(argv)
    if args.command not in COMMANDS:
        raise UnknownCommandError(args.command, list(COMMANDS))
    overrides = list(args.overrides)
    if args.eval_every is not None:
        overrides.append(f"finetune.train.eval_every={args.eval_every}")
    cfg, raw = load_experiment(args.config, overrides, args.seed)
    return Invocation(command=args.command, cfg=cfg, raw=raw, seed=args.seed)


def dispatch(argv: list[str]) -> int:
    """Run one command; returns the process exit status."""
    setup_logging()
    try:
        inv = parse(argv)
        set_log_context(run_id=generate_id(), command=inv.command)
        configure_torch()
        logger.info(f"Running {inv.command}", extra={"extra": {"seed": inv.seed}})
        result = COMMANDS[inv.command](inv)
    except DUMotionError as e:
        logger.error(f"{e.code}: {e.message}", extra={"extra": e.details})
        print(json.dumps(e.to_dict()), file=sys.stderr)
        return e.exit_status
    except Exception:
        logger.exception("Unexpected failure")
        return 1
    logger.info(f"Finished; output at {result}")
    print(result)
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
