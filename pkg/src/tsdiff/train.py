"""Mini-batch training with per-component learning rates and best-val checkpointing."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .loss import l2_normalize, logit_matrix, selfsup_loss, supervised_loss, target_matrix
from .layers import RunContext
from .model import DualEncoderModel, EncoderConfig
from .optim import Adam
from .queries import BoundDataset
from .tokenizer import Vocab, build_vocab, tokenize
from .util import stream_rng

LOSS_MODES = ("supervised", "selfsup")
LR_SCHEDULES = ("constant", "cosine")
BATCHINGS = ("random", "balanced")


class TrainingDivergence(RuntimeError):
    """Raised when a loss goes non-finite; message carries batch diagnostics."""


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 128
    epochs: int = 30
    lr_projection: float = 1e-3
    lr_signal: float = 1e-5
    lr_text: float = 1e-4
    tau: float = 1.0
    seed: int = 0
    loss_mode: str = "supervised"
    freeze_text_encoder: bool = False
    signal_targets: str = "consistent"
    soft_targets: bool = False
    clip_norm: float = 1.0
    weight_decay: float = 0.0
    lr_schedule: str = "constant"
    batching: str = "random"

    def __post_init__(self):
        if self.batch_size < 2:
            raise ValueError("batch_size must be at least 2")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if min(self.lr_projection, self.lr_signal, self.lr_text) < 0:
            raise ValueError("learning rates must be non-negative")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.loss_mode not in LOSS_MODES:
            raise ValueError(f"loss_mode must be one of {LOSS_MODES}")
        if self.lr_schedule not in LR_SCHEDULES:
            raise ValueError(f"lr_schedule must be one of {LR_SCHEDULES}")
        if self.batching not in BATCHINGS:
            raise ValueError(f"batching must be one of {BATCHINGS}")

    def to_dict(self) -> dict:
        from dataclasses import asdict

        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclass
class Checkpoint:
    params: dict[str, np.ndarray]
    epoch: int
    val_loss: float
    encoder_config: EncoderConfig
    train_config: TrainConfig
    vocab: Vocab
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_loss: float
    val_loss: float
    wall_time_s: float


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    metrics: list[EpochMetrics]


def epoch_batches(labels: np.ndarray, cfg: TrainConfig, epoch: int) -> list[np.ndarray]:
    """Index batches for one epoch, deterministic per (seed, epoch).

    random slices a full shuffle into batch_size runs. balanced gives every
    batch batch_size/n_labels samples of each label, so each step contrasts
    both levels of every characteristic; samples past the last full round sit
    out that epoch (the per-label shuffles rotate which ones).
    """
    rng = stream_rng(cfg.seed, "shuffle", epoch)
    if cfg.batching == "random":
        order = rng.permutation(len(labels))
        return [order[lo : lo + cfg.batch_size] for lo in range(0, len(labels), cfg.batch_size)]
    uniq = np.unique(labels)
    per, rem = divmod(cfg.batch_size, len(uniq))
    if per == 0 or rem:
        raise ValueError(f"balanced batching needs batch_size to be a multiple of the {len(uniq)} labels")
    streams = [rng.permutation(np.flatnonzero(labels == u)) for u in uniq]
    rounds = min(len(s) for s in streams) // per
    return [
        rng.permutation(np.concatenate([s[r * per : (r + 1) * per] for s in streams]))
        for r in range(rounds)
    ]


def lr_scale(cfg: TrainConfig, epoch: int) -> float:
    """Learning-rate multiplier for a 1-based epoch under cfg's schedule.

    Cosine decays from 1 at the first epoch to a 0.05 floor at the last so
    late epochs consolidate instead of oscillating.
    """
    if cfg.lr_schedule == "constant":
        return 1.0
    span = max(cfg.epochs - 1, 1)
    floor = 0.05
    return floor + (1.0 - floor) * 0.5 * (1.0 + math.cos(math.pi * (epoch - 1) / span))


def _stack(bound: BoundDataset, vocab: Vocab):
    refs = np.stack([pair.ref.values for pair, _ in bound.items])
    tgts = np.stack([pair.tgt.values for pair, _ in bound.items])
    labels = np.array([pair.label for pair, _ in bound.items], dtype=np.int64)
    token_lists = [tokenize(query.text, vocab) for _, query in bound.items]
    return refs, tgts, labels, token_lists


def _batch_loss(model: DualEncoderModel, refs, tgts, labels, token_lists, cfg: TrainConfig, ctx: RunContext):
    z_signal = l2_normalize(model.embed_pairs(refs, tgts, ctx))
    z_text = l2_normalize(model.embed_texts(token_lists, ctx))
    m = logit_matrix(z_text, z_signal, cfg.tau)
    if cfg.loss_mode == "selfsup":
        return selfsup_loss(m)
    g = target_matrix(labels, labels)
    return supervised_loss(m, g, signal_targets=cfg.signal_targets, soft_targets=cfg.soft_targets)


def validate(model: DualEncoderModel, val_set: BoundDataset, cfg: TrainConfig) -> float:
    """Item-weighted mean loss over validation batches, dropout off."""
    refs, tgts, labels, tokens = _stack(val_set, model.vocab)
    ctx = RunContext(training=False)
    total = 0.0
    count = 0
    for lo in range(0, len(labels), cfg.batch_size):
        sl = slice(lo, lo + cfg.batch_size)
        loss = _batch_loss(model, refs[sl], tgts[sl], labels[sl], tokens[sl], cfg, ctx)
        n = len(labels[sl])
        total += loss.item() * n
        count += n
    return total / count


def train(
    train_set: BoundDataset,
    val_set: BoundDataset,
    train_config: TrainConfig,
    encoder_config: EncoderConfig,
    on_epoch=None,
) -> TrainResult:
    """Train a fresh model; returns the minimum-validation-loss checkpoint.

    Single-threaded runs are bit-reproducible per seed: parameter init, epoch
    shuffles, and dropout masks all come from named sub-streams of the seed.
    on_epoch, if given, is called with each EpochMetrics as it completes.
    """
    if not train_set.items or not val_set.items:
        raise ValueError("train and validation sets must be nonempty")
    cfg = train_config
    enc_cfg = replace(encoder_config, freeze_text_encoder=cfg.freeze_text_encoder)
    vocab = build_vocab([query.text for _, query in train_set.items])
    model = DualEncoderModel(enc_cfg, vocab, seed=cfg.seed)

    lr_by_group = {"projection": cfg.lr_projection, "signal": cfg.lr_signal, "text": cfg.lr_text}
    scale = [1.0]  # rebound per epoch; read through the closure below

    def lr_of(name: str) -> float:
        if not model.trainable(name):
            return 0.0
        return lr_by_group[model.group_of(name)] * scale[0]

    optimizer = Adam(model.parameters(), lr_of, clip_norm=cfg.clip_norm, weight_decay=cfg.weight_decay)
    refs, tgts, labels, tokens = _stack(train_set, vocab)
    dropout_rng = stream_rng(cfg.seed, "dropout")
    train_ctx = RunContext(training=True, rng=dropout_rng)

    best: Checkpoint | None = None
    metrics: list[EpochMetrics] = []
    for epoch in range(1, cfg.epochs + 1):
        started = time.perf_counter()
        scale[0] = lr_scale(cfg, epoch)
        epoch_total = 0.0
        seen = 0
        for step, idx in enumerate(epoch_batches(labels, cfg, epoch)):
            model.zero_grad()
            loss = _batch_loss(
                model, refs[idx], tgts[idx], labels[idx], [tokens[i] for i in idx], cfg, train_ctx
            )
            value = loss.item()
            if not np.isfinite(value):
                raise TrainingDivergence(
                    f"non-finite loss at epoch {epoch}, step {step}: "
                    f"loss={value}, label counts={np.bincount(labels[idx]).tolist()}"
                )
            loss.backward()
            optimizer.step()
            epoch_total += value * len(idx)
            seen += len(idx)
        train_loss = epoch_total / seen
        val_loss = validate(model, val_set, cfg)
        metrics.append(EpochMetrics(epoch, train_loss, val_loss, time.perf_counter() - started))
        if on_epoch is not None:
            on_epoch(metrics[-1])
        if best is None or val_loss < best.val_loss:
            best = Checkpoint(
                params={name: t.data.copy() for name, t in model.parameters().items()},
                epoch=epoch,
                val_loss=val_loss,
                encoder_config=enc_cfg,
                train_config=cfg,
                vocab=vocab,
            )
    return TrainResult(checkpoint=best, metrics=metrics)


def restore_model(checkpoint: Checkpoint) -> DualEncoderModel:
    """Model with parameters loaded from a checkpoint snapshot."""
    model = DualEncoderModel(checkpoint.encoder_config, checkpoint.vocab, seed=checkpoint.train_config.seed)
    params = model.parameters()
    missing = set(params) ^ set(checkpoint.params)
    if missing:
        raise ValueError(f"checkpoint does not match model architecture; differing tensors: {sorted(missing)}")
    for name, tensor in params.items():
        stored = checkpoint.params[name]
        if stored.shape != tensor.data.shape:
            raise ValueError(f"shape mismatch for {name}: {stored.shape} vs {tensor.data.shape}")
        tensor.data = stored.astype(np.float64)
    return model
