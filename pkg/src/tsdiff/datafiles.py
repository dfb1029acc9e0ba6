"""On-disk formats for pair datasets, query pools, and pair-query bindings.

A dataset directory holds `manifest.jsonl` (one record per pair: identity,
label, perturbation parameters, sample offset) and `samples.f32` (flat
little-endian float32, reference then target contiguously per pair, in
manifest order). Queries are tab-separated `query_id, label, text` lines;
bindings are `pair_id, query_id` lines. All writers produce byte-identical
output for identical inputs.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .perturb import Characteristic, PairSample, PerturbLevel, PerturbParams
from .queries import BoundDataset, QueryText
from .series import Series
from .util import atomic_open, atomic_write_text

MANIFEST_NAME = "manifest.jsonl"
SAMPLES_NAME = "samples.f32"

SPLITS = ("train", "val", "test")


def _params_record(p: PerturbParams) -> dict:
    return {"alpha": p.alpha, "beta": p.beta, "gamma": p.gamma, "theta": p.theta, "t_s": p.t_s, "seed": p.seed}


def _params_from(record: dict) -> PerturbParams:
    return PerturbParams(
        alpha=float(record["alpha"]),
        beta=float(record["beta"]),
        gamma=float(record["gamma"]),
        theta=float(record["theta"]),
        t_s=int(record["t_s"]),
        seed=None if record["seed"] is None else int(record["seed"]),
    )


def save_dataset(out_dir: str | os.PathLike, splits: dict[str, list[PairSample]]) -> None:
    """Write manifest + samples for the given splits (train/val/test order)."""
    out_dir = Path(out_dir)
    records = []
    offset = 0
    with atomic_open(out_dir / SAMPLES_NAME) as samples:
        for split in SPLITS:
            for pair in splits.get(split, []):
                block = np.concatenate([pair.ref.values, pair.tgt.values]).astype("<f4")
                samples.write(block.tobytes())
                records.append(
                    {
                        "pair_id": pair.pair_id,
                        "split": split,
                        "base_id": pair.base_id,
                        "label": pair.label,
                        "characteristic": pair.characteristic.value,
                        "target_level": pair.target_level.value,
                        "length": pair.ref.length,
                        "offset": offset,
                        "params_ref": _params_record(pair.params_ref),
                        "params_tgt": _params_record(pair.params_tgt),
                    }
                )
                offset += block.size
    lines = [json.dumps(r, separators=(",", ":")) for r in records]
    atomic_write_text(out_dir / MANIFEST_NAME, "\n".join(lines) + ("\n" if lines else ""))


def load_dataset(in_dir: str | os.PathLike) -> dict[str, list[PairSample]]:
    """Read a dataset directory back into split lists of PairSample."""
    in_dir = Path(in_dir)
    manifest = in_dir / MANIFEST_NAME
    samples_path = in_dir / SAMPLES_NAME
    if not manifest.is_file() or not samples_path.is_file():
        raise FileNotFoundError(f"not a dataset directory: {in_dir}")
    flat = np.fromfile(samples_path, dtype="<f4")
    splits: dict[str, list[PairSample]] = {s: [] for s in SPLITS}
    with open(manifest, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                r = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{manifest}:{line_no}: bad manifest record: {exc}") from exc
            n = int(r["length"])
            lo = int(r["offset"])
            if lo + 2 * n > flat.size:
                raise ValueError(f"{manifest}:{line_no}: sample file truncated for {r['pair_id']}")
            ref = flat[lo : lo + n].astype(np.float64)
            tgt = flat[lo + n : lo + 2 * n].astype(np.float64)
            pair = PairSample(
                pair_id=r["pair_id"],
                ref=Series(f"{r['pair_id']}/ref", ref),
                tgt=Series(f"{r['pair_id']}/tgt", tgt),
                label=int(r["label"]),
                characteristic=Characteristic(r["characteristic"]),
                target_level=PerturbLevel(r["target_level"]),
                params_ref=_params_from(r["params_ref"]),
                params_tgt=_params_from(r["params_tgt"]),
                base_id=r["base_id"],
            )
            split = r.get("split", "train")
            if split not in splits:
                raise ValueError(f"{manifest}:{line_no}: unknown split {split!r}")
            splits[split].append(pair)
    return splits


def save_queries(path: str | os.PathLike, queries: list[QueryText]) -> None:
    lines = [f"{q.query_id}\t{q.label}\t{q.text}" for q in queries]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def load_queries(path: str | os.PathLike) -> list[QueryText]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{line_no}: expected query_id<TAB>label<TAB>text")
            out.append(QueryText(query_id=parts[0], label=int(parts[1]), text=parts[2]))
    return out


def save_bindings(path: str | os.PathLike, bound: BoundDataset) -> None:
    lines = [f"{pair.pair_id}\t{query.query_id}" for pair, query in bound.items]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def load_bindings(path: str | os.PathLike) -> list[tuple[str, str]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{line_no}: expected pair_id<TAB>query_id")
            out.append((parts[0], parts[1]))
    return out


def save_json(path: str | os.PathLike, payload: dict) -> None:
    """Human-readable JSON with stable key order, for config echoes."""
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
