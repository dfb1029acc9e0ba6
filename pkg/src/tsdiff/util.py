"""Shared plumbing: named RNG sub-streams, atomic file writes, fingerprints."""

from __future__ import annotations

import hashlib
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path

import numpy as np

# Fixed ids for the named randomness streams so every component can be
# regenerated independently from the single master seed.
STREAMS = {
    "data": 1,
    "bases": 2,
    "queries": 3,
    "query-split": 4,
    "bind": 5,
    "init": 6,
    "shuffle": 7,
    "dropout": 8,
    "cycle": 9,
}


def stream_rng(seed: int, stream: str, *extra: int) -> np.random.Generator:
    """Generator for the named sub-stream of a master seed.

    Extra integers select nested sub-streams (e.g. per-pair, per-epoch), so
    parallel and serial consumers draw identical values.
    """
    return np.random.default_rng(np.random.SeedSequence((seed, STREAMS[stream], *extra)))


def atomic_write_bytes(path: str | os.PathLike, payload: bytes) -> None:
    """Write a file via temp + rename so readers never see partial output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


@contextmanager
def atomic_open(path: str | os.PathLike):
    """Binary file handle that lands at `path` only if the block completes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def file_fingerprint(path: str | os.PathLike) -> str:
    """sha256 hex digest of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
