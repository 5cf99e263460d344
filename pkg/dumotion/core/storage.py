"""Binary track codec, atomic directory writes and content hashing."""

import hashlib
import os
import shutil
import uuid
from collections.abc import Iterator, Mapping
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import numpy as np
import torch

from dumotion.core.exceptions import (
    PathExistsError,
    ShapeMismatchError,
    TruncatedFileError,
)

F32_LE = np.dtype("<f4")


def generate_id() -> str:
    """Generate a unique ID."""
    return uuid.uuid4().hex


def write_f32(path: Path, array: np.ndarray) -> None:
    """Write an array as little-endian float32 in row-major order."""
    data = np.ascontiguousarray(array, dtype=F32_LE)
    path.write_bytes(data.tobytes(order="C"))


def read_f32(path: Path, shape: tuple[int, ...]) -> np.ndarray:
    """Read a float32 track and check it against the expected shape."""
    raw = path.read_bytes()
    if len(raw) % F32_LE.itemsize:
        raise TruncatedFileError(str(path), len(raw))
    flat = np.frombuffer(raw, dtype=F32_LE)
    expected = int(np.prod(shape, dtype=np.int64))
    if flat.size != expected:
        row = int(np.prod(shape[1:], dtype=np.int64)) if len(shape) > 1 else 1
        actual: tuple[int, ...] = (flat.size,)
        if row and flat.size % row == 0:
            actual = (flat.size // row, *shape[1:])
        raise ShapeMismatchError(
            f"'{path.name}' holds {flat.size} values, manifest expects {expected}",
            expected=shape,
            actual=tuple(actual),
        )
    # Native float32 copy so callers get a writable array
    return flat.reshape(shape).astype(np.float32)


@contextmanager
def atomic_directory(target: Path, overwrite: bool = False) -> Iterator[Path]:
    """Yield a temp sibling directory that replaces ``target`` on success."""
    if target.exists() and not overwrite:
        raise PathExistsError(str(target))
    target.parent.mkdir(parents=True, exist_ok=True)
    staging = target.parent / f".{target.name}.tmp-{uuid.uuid4().hex[:8]}"
    staging.mkdir()
    try:
        yield staging
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    if target.exists():
        backup = target.parent / f".{target.name}.old-{uuid.uuid4().hex[:8]}"
        os.replace(target, backup)
        os.replace(staging, target)
        shutil.rmtree(backup, ignore_errors=True)
    else:
        os.replace(staging, target)


def hash_array(array: np.ndarray | torch.Tensor) -> str:
    """SHA-256 of an array's dtype, shape and bytes."""
    if isinstance(array, torch.Tensor):
        array = array.detach().cpu().contiguous().numpy()
    data = np.ascontiguousarray(array)
    digest = hashlib.sha256()
    digest.update(str(data.dtype).encode())
    digest.update(str(data.shape).encode())
    digest.update(data.tobytes())
    return digest.hexdigest()


def hash_tensors(tensors: Mapping[str, np.ndarray | torch.Tensor]) -> dict[str, str]:
    """Per-name hashes, e.g. for frozen-parameter audits."""
    return {name: hash_array(value) for name, value in sorted(tensors.items())}


def hash_payload(*parts: Any) -> str:
    """Stable hash over strings, bytes and arrays (config + data fingerprints)."""
    digest = hashlib.sha256()
    for part in parts:
        if isinstance(part, (np.ndarray, torch.Tensor)):
            digest.update(hash_array(part).encode())
        elif isinstance(part, bytes):
            digest.update(part)
        else:
            digest.update(str(part).encode())
    return digest.hexdigest()
