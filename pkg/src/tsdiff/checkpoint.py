"""Self-describing binary container for checkpoints and indexes.

Layout: 8-byte magic, little-endian uint32 header length, UTF-8 JSON header,
then the named tensors as raw little-endian float32 in header order. The
header is serialized with sorted keys and no timestamps, so identical
contents give identical bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .model import EncoderConfig
from .tokenizer import Vocab
from .train import Checkpoint, TrainConfig
from .util import atomic_write_bytes

MAGIC = b"TSDIFF01"


def write_container(path, header: dict, tensors: dict[str, np.ndarray]) -> None:
    header = dict(header)
    header["tensors"] = [{"name": name, "shape": list(a.shape)} for name, a in tensors.items()]
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<I", len(header_bytes))
    blob += header_bytes
    for a in tensors.values():
        blob += np.ascontiguousarray(a, dtype="<f4").tobytes()
    atomic_write_bytes(path, bytes(blob))


def read_container(path) -> tuple[dict, dict[str, np.ndarray]]:
    raw = Path(path).read_bytes()
    if raw[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a container file (bad magic)")
    (header_len,) = struct.unpack_from("<I", raw, len(MAGIC))
    start = len(MAGIC) + 4
    try:
        header = json.loads(raw[start : start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path}: corrupt container header: {exc}") from exc
    offset = start + header_len
    tensors: dict[str, np.ndarray] = {}
    for entry in header.pop("tensors", []):
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        end = offset + 4 * count
        if end > len(raw):
            raise ValueError(f"{path}: container truncated at tensor {entry['name']}")
        tensors[entry["name"]] = np.frombuffer(raw, dtype="<f4", count=count, offset=offset).reshape(shape)
        offset = end
    if offset != len(raw):
        raise ValueError(f"{path}: {len(raw) - offset} trailing bytes after tensor payload")
    return header, tensors


def save_checkpoint(path, ckpt: Checkpoint) -> None:
    header = {
        "kind": "checkpoint",
        "format_version": 1,
        "encoder_config": ckpt.encoder_config.to_dict(),
        "train_config": ckpt.train_config.to_dict(),
        "vocab": list(ckpt.vocab.tokens),
        "epoch": ckpt.epoch,
        "val_loss": ckpt.val_loss,
        "metadata": ckpt.metadata,
    }
    write_container(path, header, ckpt.params)


def load_checkpoint(path) -> Checkpoint:
    header, tensors = read_container(path)
    if header.get("kind") != "checkpoint":
        raise ValueError(f"{path}: container is not a checkpoint (kind={header.get('kind')!r})")
    return Checkpoint(
        params={name: a.astype(np.float64) for name, a in tensors.items()},
        epoch=int(header["epoch"]),
        val_loss=float(header["val_loss"]),
        encoder_config=EncoderConfig.from_dict(header["encoder_config"]),
        train_config=TrainConfig.from_dict(header["train_config"]),
        vocab=Vocab(tokens=tuple(header["vocab"])),
        metadata=header.get("metadata", {}),
    )
