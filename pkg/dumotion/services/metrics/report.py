"""Feature-space distances and the full metric report."""

import numpy as np

from dumotion.core.exceptions import (
    InsufficientSamplesError,
    MetricUndefinedError,
    ShapeMismatchError,
)
from dumotion.core.logging import get_logger
from dumotion.core.models.experiment import EvaluateConfig
from dumotion.core.models.metrics import FeatureScope, GaussianStats, MetricReport
from dumotion.core.models.motion import AudioFeatureTrack, MotionSequence
from dumotion.core.storage import hash_payload
from dumotion.services.metrics.beat import beat_consistency
from dumotion.services.metrics.diversity import diversity
from dumotion.services.metrics.extractor import FeatureExtractor, fit_feature_extractor
from dumotion.services.metrics.frechet import frechet_distance
from dumotion.services.metrics.reconstruction import face_mse_lvd

logger = get_logger(__name__)


def fmd_fgd(
    generated: list[MotionSequence],
    reference: list[MotionSequence],
    extractor: FeatureExtractor,
) -> float:
    """Fréchet distance of extractor features; FMD for holistic scope, FGD for body."""
    metric = "fmd" if extractor.scope == FeatureScope.HOLISTIC else "fgd"
    for side in (generated, reference):
        if len(side) < 2:
            raise InsufficientSamplesError(metric, len(side), 2)
    gen_stats = GaussianStats.fit(extractor.features(generated))
    ref_stats = GaussianStats.fit(extractor.features(reference))
    return frechet_distance(gen_stats, ref_stats)


def _mean_beat_consistency(
    generated: list[MotionSequence],
    audio: list[AudioFeatureTrack],
    sigma_seconds: float,
) -> float:
    scores = []
    reasons = set()
    for seq, track in zip(generated, audio, strict=True):
        try:
            score = beat_consistency(seq.body, track.rhythm, seq.fps, sigma_seconds)
            scores.append(score)
        except MetricUndefinedError as e:
            reasons.add(e.reason)
    if not scores:
        raise MetricUndefinedError("bc", "; ".join(sorted(reasons)) or "no clips")
    return float(np.mean(scores))


def evaluate_motion(
    generated: list[MotionSequence],
    reference: list[MotionSequence],
    audio: list[AudioFeatureTrack],
    cfg: EvaluateConfig | None = None,
    extractors: dict[FeatureScope, FeatureExtractor] | None = None,
    dataset_hash: str = "",
) -> MetricReport:
    """All six metrics; clip k of ``generated`` pairs with clip k of ``reference``.

    Extractors are fitted on ``reference`` unless supplied. Metrics that
    cannot be computed are reported as undefined with their reason.
    """
    cfg = cfg or EvaluateConfig()
    if len(generated) != len(reference) or len(generated) != len(audio):
        raise ShapeMismatchError(
            "generated, reference and audio lists differ in length",
            expected=(len(reference),),
            actual=(len(generated), len(audio)),
        )
    if extractors is None:
        extractors = {
            scope: fit_feature_extractor(reference, scope, cfg.extractor)
            for scope in FeatureScope
        }

    values: dict[str, float] = {}
    undefined: dict[str, str] = {}

    for name, scope in (("fmd", FeatureScope.HOLISTIC), ("fgd", FeatureScope.BODY)):
        try:
            values[name] = fmd_fgd(generated, reference, extractors[scope])
        except InsufficientSamplesError as e:
            undefined[name] = e.message
    try:
        values["bc"] = _mean_beat_consistency(generated, audio, cfg.bc_sigma_seconds)
    except MetricUndefinedError as e:
        undefined["bc"] = e.reason
    try:
        values["div"] = diversity([s.body for s in generated], cfg.div_pairs, cfg.seed)
    except InsufficientSamplesError as e:
        undefined["div"] = e.message

    pairs = [
        face_mse_lvd(g.face, r.face)
        for g, r in zip(generated, reference, strict=True)
    ]
    if pairs:
        values["mse"] = float(np.mean([p[0] for p in pairs]))
        values["lvd"] = float(np.mean([p[1] for p in pairs]))
    else:
        undefined["mse"] = undefined["lvd"] = "no clips"

    report = MetricReport(
        **values,
        undefined=undefined,
        config_hash=hash_payload(cfg.model_dump_json())[:16],
        dataset_hash=dataset_hash,
        extractor_hash=hash_payload(
            *(extractors[scope].hash for scope in FeatureScope)
        )[:16],
    )
    logger.info(
        "Evaluated generated motion",
        extra={"extra": {"clips": len(generated), **report.values()}},
    )
    return report
