"""Embedding index, cosine-similarity search, and mAP evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .layers import RunContext
from .loss import l2_normalize
from .model import DualEncoderModel
from .perturb import PairSample
from .queries import QueryText
from .tokenizer import tokenize

_EMBED_BATCH = 256


@dataclass
class Index:
    pair_ids: list[str]
    labels: np.ndarray
    vectors: np.ndarray  # (N, d), unit rows
    model_fingerprint: str = ""

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if len(self.pair_ids) != len(self.labels) or len(self.pair_ids) != len(self.vectors):
            raise ValueError("index entry counts disagree")
        if len(set(self.pair_ids)) != len(self.pair_ids):
            raise ValueError("duplicate pair ids in index")
        if len(self.vectors):
            norms = np.linalg.norm(self.vectors, axis=1)
            if np.any(np.abs(norms - 1.0) > 1e-6):
                raise ValueError("index vectors must be unit-normalized")

    def __len__(self) -> int:
        return len(self.pair_ids)


@dataclass(frozen=True)
class RankedResult:
    items: list[tuple[str, float]]  # (pair_id, score), scores non-increasing
    k: int


def embed_pair_batch(model: DualEncoderModel, pairs: list[PairSample]) -> np.ndarray:
    """Unit-normalized signal-pair embeddings, inference mode, chunked."""
    ctx = RunContext(training=False)
    chunks = []
    for lo in range(0, len(pairs), _EMBED_BATCH):
        chunk = pairs[lo : lo + _EMBED_BATCH]
        refs = np.stack([p.ref.values for p in chunk])
        tgts = np.stack([p.tgt.values for p in chunk])
        chunks.append(l2_normalize(model.embed_pairs(refs, tgts, ctx)).data)
    return np.concatenate(chunks, axis=0)


def embed_text_batch(model: DualEncoderModel, texts: list[str]) -> np.ndarray:
    ctx = RunContext(training=False)
    chunks = []
    for lo in range(0, len(texts), _EMBED_BATCH):
        ids = [tokenize(t, model.vocab) for t in texts[lo : lo + _EMBED_BATCH]]
        chunks.append(l2_normalize(model.embed_texts(ids, ctx)).data)
    return np.concatenate(chunks, axis=0)


def build_index(model: DualEncoderModel, pairs: list[PairSample], model_fingerprint: str = "") -> Index:
    if not pairs:
        raise ValueError("cannot build an index over zero pairs")
    vectors = embed_pair_batch(model, pairs)
    return Index(
        pair_ids=[p.pair_id for p in pairs],
        labels=np.array([p.label for p in pairs]),
        vectors=vectors,
        model_fingerprint=model_fingerprint,
    )


def search(index: Index, q_embed: np.ndarray, k: int) -> RankedResult:
    """Top-k by dot product (cosine on unit vectors); ties favor lower pair_id."""
    if not 1 <= k <= len(index):
        raise ValueError(f"k={k} outside 1..{len(index)}")
    q = np.asarray(q_embed, dtype=np.float64).ravel()
    if abs(np.linalg.norm(q) - 1.0) > 1e-6:
        raise ValueError("query embedding must be unit-normalized")
    scores = index.vectors @ q
    order = sorted(range(len(index)), key=lambda i: (-scores[i], index.pair_ids[i]))
    return RankedResult(items=[(index.pair_ids[i], float(scores[i])) for i in order[:k]], k=k)


def average_precision(ranked_relevance, interpolated: bool = False) -> float:
    """AP over an ordered 0/1 relevance list.

    Default: mean of precision at each hit. interpolated=True gives the
    11-point variant (max precision at recall >= each of 0.0, 0.1, ..., 1.0).
    """
    flags = np.asarray(list(ranked_relevance), dtype=np.float64)
    total = flags.sum()
    if total == 0:
        raise ValueError("average precision undefined without relevant items")
    hits = np.cumsum(flags)
    ranks = np.arange(1, len(flags) + 1)
    if not interpolated:
        return float((hits[flags == 1] / ranks[flags == 1]).sum() / total)
    precision = hits / ranks
    recall = hits / total
    out = 0.0
    for r in np.linspace(0.0, 1.0, 11):
        eligible = precision[recall >= r - 1e-12]
        out += eligible.max() if len(eligible) else 0.0
    return float(out / 11.0)


@dataclass
class MapReport:
    per_label: dict[int, float]
    overall: float
    query_counts: dict[int, int] = field(default_factory=dict)


def evaluate_map(model: DualEncoderModel, queries: list[QueryText], pairs: list[PairSample]) -> MapReport:
    """Full-ranking mAP per relationship plus the overall mean over queries."""
    if not queries or not pairs:
        raise ValueError("need at least one query and one pair")
    pair_labels = {p.label for p in pairs}
    query_labels = {q.label for q in queries}
    if not query_labels <= pair_labels:
        raise ValueError(f"labels with queries but no positive pairs: {sorted(query_labels - pair_labels)}")
    index = build_index(model, pairs)
    q_vectors = embed_text_batch(model, [q.text for q in queries])

    id_to_label = {p.pair_id: p.label for p in pairs}
    ap_by_label: dict[int, list[float]] = {}
    all_aps = []
    for q, vec in zip(queries, q_vectors):
        ranked = search(index, vec, k=len(index))
        flags = [1 if id_to_label[pid] == q.label else 0 for pid, _ in ranked.items]
        ap = average_precision(flags)
        ap_by_label.setdefault(q.label, []).append(ap)
        all_aps.append(ap)
    return MapReport(
        per_label={label: float(np.mean(v)) for label, v in sorted(ap_by_label.items())},
        overall=float(np.mean(all_aps)),
        query_counts={label: len(v) for label, v in sorted(ap_by_label.items())},
    )


LABEL_COLUMNS = ("UT-L", "UT-S", "DT-L", "DT-S", "SP-L", "SP-S", "DO-L", "DO-S", "NO-L", "NO-S", "BL-L", "BL-S")


def format_report(rows: list[tuple[str, MapReport]]) -> str:
    """Tab-separated table: config name, one column per relationship, Total."""
    lines = ["# mAP per relationship label", "config\t" + "\t".join(LABEL_COLUMNS) + "\tTotal"]
    for name, report in rows:
        cells = [f"{report.per_label.get(label, float('nan')):.4f}" for label in range(1, 13)]
        lines.append(name + "\t" + "\t".join(cells) + f"\t{report.overall:.4f}")
    return "\n".join(lines) + "\n"


def save_index(path, index: Index) -> None:
    from .checkpoint import write_container

    header = {
        "kind": "index",
        "format_version": 1,
        "model_fingerprint": index.model_fingerprint,
        "pair_ids": index.pair_ids,
        "labels": index.labels.tolist(),
    }
    write_container(path, header, {"vectors": index.vectors})


def load_index(path) -> Index:
    from .checkpoint import read_container

    header, tensors = read_container(path)
    if header.get("kind") != "index":
        raise ValueError(f"{path}: container is not an index (kind={header.get('kind')!r})")
    vectors = tensors["vectors"].astype(np.float64)
    # Serialization rounds to 32-bit; restore exact unit norms.
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError(f"{path}: zero vector in stored index")
    return Index(
        pair_ids=list(header["pair_ids"]),
        labels=np.array(header["labels"]),
        vectors=vectors / norms,
        model_fingerprint=header.get("model_fingerprint", ""),
    )
