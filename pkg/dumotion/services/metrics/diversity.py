"""Diversity of generated gestures."""

from itertools import combinations

import numpy as np

from dumotion.core.exceptions import InsufficientSamplesError, InvalidArgumentError


def pooled(seq: np.ndarray) -> np.ndarray:
    """Per-channel temporal mean."""
    return np.asarray(seq, dtype=np.float64).mean(axis=0)


def diversity(samples: list[np.ndarray], pairs: int = 100, seed: int = 0) -> float:
    """Mean L2 distance between pooled vectors over ``pairs`` distinct unordered pairs.

    Pairs are drawn without replacement from the sorted index pairs, so the
    draw depends on the seed and sample count only; asking for at least every
    pair uses all of them.
    """
    if len(samples) < 2:
        raise InsufficientSamplesError("div", len(samples), 2)
    if pairs < 1:
        raise InvalidArgumentError(
            "diversity needs at least one pair", {"pairs": pairs}
        )
    vectors = np.stack([pooled(s) for s in samples])
    all_pairs = list(combinations(range(len(samples)), 2))
    if pairs < len(all_pairs):
        rng = np.random.default_rng(seed)
        chosen = np.sort(rng.choice(len(all_pairs), size=pairs, replace=False))
        all_pairs = [all_pairs[k] for k in chosen]
    i, j = np.asarray(all_pairs).T
    return float(np.linalg.norm(vectors[i] - vectors[j], axis=1).mean())
