"""Deterministic train/val/test partitioning."""

import math

import numpy as np

from dumotion.core.exceptions import InvalidArgumentError
from dumotion.core.logging import get_logger
from dumotion.core.models.motion import Dataset

logger = get_logger(__name__)

DEFAULT_FRACTIONS = (0.85, 0.075, 0.075)
SPLIT_NAMES = ("train", "val", "test")


def split_sizes(n: int, fractions: tuple[float, float, float]) -> tuple[int, int, int]:
    """Floor the val and test buckets; the remainder goes to train."""
    n_val = math.floor(n * fractions[1] + 1e-9)
    n_test = math.floor(n * fractions[2] + 1e-9)
    return n - n_val - n_test, n_val, n_test


def split_dataset(
    ds: Dataset,
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS,
) -> tuple[Dataset, Dataset, Dataset]:
    """Disjoint, exhaustive split seeded by the dataset's generator seed."""
    if len(fractions) != 3 or any(f < 0 for f in fractions):
        raise InvalidArgumentError(
            f"fractions must be three non-negative numbers, got {fractions}",
            {"fractions": list(fractions)},
        )
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise InvalidArgumentError(
            f"fractions sum to {sum(fractions)!r}, not 1",
            {"fractions": list(fractions)},
        )

    n = len(ds)
    n_train, n_val, n_test = split_sizes(n, fractions)
    order = np.random.default_rng(ds.manifest.seed).permutation(n)
    val = sorted(int(i) for i in order[:n_val])
    test = sorted(int(i) for i in order[n_val : n_val + n_test])
    train = sorted(int(i) for i in order[n_val + n_test :])

    logger.debug(f"Split {n} samples into {n_train}/{n_val}/{n_test}")
    return (
        ds.subset(train, "train"),
        ds.subset(val, "val"),
        ds.subset(test, "test"),
    )


def select_split(
    ds: Dataset, name: str, fractions: tuple[float, float, float]
) -> Dataset:
    """One named part of :func:`split_dataset`, or the whole set for ``all``."""
    if name == "all":
        return ds
    if name not in SPLIT_NAMES:
        raise InvalidArgumentError(
            f"Unknown split '{name}'", {"split": name, "known": [*SPLIT_NAMES, "all"]}
        )
    return split_dataset(ds, fractions)[SPLIT_NAMES.index(name)]
