"""Sampling motion through the holistic head."""

import torch

from dumotion.core.exceptions import InvalidArgumentError
from dumotion.core.logging import get_logger
from dumotion.core.models.motion import AudioFeatureTrack, EmotionLabel, MotionSequence
from dumotion.services.conditioning.projector import ConditionBatch
from dumotion.services.data.batching import AudioBatch
from dumotion.services.diffusion.gaussian import GaussianDiffusion
from dumotion.services.network.dutrans import DUTrans

logger = get_logger(__name__)


def generate(
    model: DUTrans,
    diffusion: GaussianDiffusion,
    tracks: list[AudioFeatureTrack],
    cond: ConditionBatch | None = None,
    seed: int = 0,
    fps: float = 30.0,
    identity_labels: list[str] | None = None,
    emotion_labels: list[EmotionLabel] | None = None,
) -> list[MotionSequence]:
    """One motion clip per audio track, sampled jointly from ``seed``.

    Labels are attached to the returned clips for bookkeeping only; the
    model sees conditions through ``cond``.
    """
    if not tracks:
        raise InvalidArgumentError("generation needs at least one audio track")
    if cond is not None and cond.batch_size != len(tracks):
        raise InvalidArgumentError(
            f"{cond.batch_size} conditions for {len(tracks)} audio tracks"
        )
    dims = model.config.dims
    audio = AudioBatch.from_tracks(tracks)
    generator = torch.Generator().manual_seed(seed)

    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            holistic = diffusion.p_sample_loop(
                model,
                audio,
                cond,
                (len(tracks), audio.n_frames, dims.holistic),
                dims.face,
                generator,
            )
    finally:
        model.train(was_training)

    clips = []
    for k in range(len(tracks)):
        clips.append(
            MotionSequence.from_holistic(
                holistic[k].double().numpy(),
                face_dim=dims.face,
                fps=fps,
                identity_label=identity_labels[k] if identity_labels else "",
                emotion_label=(
                    emotion_labels[k] if emotion_labels else EmotionLabel.NEUTRAL
                ),
            )
        )
    logger.debug(f"Generated {len(clips)} clips", extra={"extra": {"seed": seed}})
    return clips
