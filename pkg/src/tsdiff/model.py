"""Dual-encoder model: signal pair tower and text tower share one embedding space.

Signal tower: shared-weight encoder over reference and target, optional
symmetric cross-attention between their token sequences, pooling, merge
(difference or concatenation), projection head. Text tower: token embedding
plus a small transformer encoder, pooling, its own projection head.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .autograd import Tensor, concatenate, gelu, parameter, take_rows
from .layers import Conv1d, Init, Linear, MultiHeadAttention, ProjectionHead, RunContext, TransformerLayer, dropout
from .tokenizer import PAD_ID, Vocab
from .util import stream_rng

ARCHS = ("conv", "transformer")
MERGES = ("diff", "concat")
POOLINGS = ("mean", "summary")


@dataclass(frozen=True)
class EncoderConfig:
    signal_arch: str = "transformer"
    embed_dim: int = 128
    series_length: int = 256
    use_cross_attention: bool = False
    merge_method: str = "diff"
    attention_heads: int = 8
    conv_channels: tuple[int, ...] = (32, 64, 128, 128)
    conv_kernel: int = 7
    conv_stride: int = 2
    patch_size: int = 16
    transformer_layers: int = 4
    transformer_heads: int = 4
    transformer_ff: int = 256
    text_layers: int = 2
    text_heads: int = 4
    text_ff: int = 256
    text_max_tokens: int = 64
    pooling: str = "mean"
    dropout_rate: float = 0.1
    freeze_text_encoder: bool = False

    def __post_init__(self):
        if self.signal_arch not in ARCHS:
            raise ValueError(f"signal_arch must be one of {ARCHS}")
        if self.merge_method not in MERGES:
            raise ValueError(f"merge_method must be one of {MERGES}")
        if self.pooling not in POOLINGS:
            raise ValueError(f"pooling must be one of {POOLINGS}")
        if self.embed_dim < 1 or self.series_length < 2:
            raise ValueError("embed_dim and series_length must be positive")
        if self.signal_arch == "transformer":
            if self.series_length % self.patch_size != 0:
                raise ValueError(f"series_length {self.series_length} not divisible by patch_size {self.patch_size}")
            if self.embed_dim % self.transformer_heads != 0:
                raise ValueError("embed_dim not divisible by transformer_heads")
        if self.signal_arch == "conv" and self.conv_channels[-1] != self.embed_dim:
            raise ValueError("conv arch needs conv_channels[-1] == embed_dim (channels become the embedding)")
        if self.use_cross_attention and self.embed_dim % self.attention_heads != 0:
            raise ValueError("embed_dim not divisible by attention_heads")
        if self.embed_dim % self.text_heads != 0:
            raise ValueError("embed_dim not divisible by text_heads")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["conv_channels"] = list(self.conv_channels)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EncoderConfig":
        d = dict(d)
        if "conv_channels" in d:
            d["conv_channels"] = tuple(d["conv_channels"])
        return cls(**d)


class _ConvSignalEncoder:
    def __init__(self, cfg: EncoderConfig, init: Init):
        self.blocks = []
        c_in = 1
        for c_out in cfg.conv_channels:
            self.blocks.append(Conv1d(c_in, c_out, cfg.conv_kernel, cfg.conv_stride, init))
            c_in = c_out

    def __call__(self, x: Tensor, ctx: RunContext) -> Tensor:
        n, length = x.shape
        h = x.reshape(n, 1, length)
        last = len(self.blocks) - 1
        for i, block in enumerate(self.blocks):
            h = block(h)
            if i != last:
                h = gelu(h)
        return h.swapaxes(1, 2)  # (N, tokens, channels=d)

    def params(self):
        out = []
        for i, block in enumerate(self.blocks):
            out.extend((f"block{i}.{k}", t) for k, t in block.params())
        return out


class _TransformerSignalEncoder:
    def __init__(self, cfg: EncoderConfig, init: Init):
        self.patch_size = cfg.patch_size
        self.tokens = cfg.series_length // cfg.patch_size
        self.patch = Linear(cfg.patch_size, cfg.embed_dim, init)
        self.pos = init.weight((self.tokens, cfg.embed_dim), fan_in=cfg.embed_dim)
        self.layers = [
            TransformerLayer(cfg.embed_dim, cfg.transformer_heads, cfg.transformer_ff, cfg.dropout_rate, init)
            for _ in range(cfg.transformer_layers)
        ]

    def __call__(self, x: Tensor, ctx: RunContext) -> Tensor:
        n, length = x.shape
        h = self.patch(x.reshape(n, self.tokens, self.patch_size)) + self.pos
        for layer in self.layers:
            h = layer(h, ctx)
        return h

    def params(self):
        out = [("patch.w", self.patch.w), ("patch.b", self.patch.b), ("pos", self.pos)]
        for i, layer in enumerate(self.layers):
            out.extend((f"layer{i}.{k}", t) for k, t in layer.params())
        return out


class _TextEncoder:
    def __init__(self, cfg: EncoderConfig, vocab_size: int, init: Init):
        d = cfg.embed_dim
        self.embed = init.weight((vocab_size, d), fan_in=d)
        self.pos = init.weight((cfg.text_max_tokens, d), fan_in=d)
        self.max_tokens = cfg.text_max_tokens
        self.dropout_rate = cfg.dropout_rate
        self.layers = [
            TransformerLayer(d, cfg.text_heads, cfg.text_ff, cfg.dropout_rate, init) for _ in range(cfg.text_layers)
        ]

    def __call__(self, ids: np.ndarray, ctx: RunContext) -> tuple[Tensor, np.ndarray]:
        n, t = ids.shape
        if t > self.max_tokens:
            raise ValueError(f"sequence of {t} tokens exceeds text_max_tokens {self.max_tokens}")
        mask = ids != PAD_ID
        h = take_rows(self.embed, ids) + self.pos[:t]
        h = dropout(h, self.dropout_rate, ctx)
        for layer in self.layers:
            h = layer(h, ctx, key_mask=mask)
        return h, mask

    def params(self):
        out = [("embed", self.embed), ("pos", self.pos)]
        for i, layer in enumerate(self.layers):
            out.extend((f"layer{i}.{k}", t) for k, t in layer.params())
        return out


class DualEncoderModel:
    """Both towers plus the parameter registry used by the optimizer/checkpoint.

    Parameter names are hierarchical; the leading component routes each tensor
    to its learning-rate group (signal, cross, text, projection heads).
    """

    def __init__(self, config: EncoderConfig, vocab: Vocab, seed: int = 0):
        self.config = config
        self.vocab = vocab
        init = Init(stream_rng(seed, "init"))
        d = config.embed_dim

        if config.signal_arch == "conv":
            self.signal_encoder = _ConvSignalEncoder(config, init)
        else:
            self.signal_encoder = _TransformerSignalEncoder(config, init)
        self.cross = MultiHeadAttention(d, config.attention_heads, init) if config.use_cross_attention else None
        merged_width = d if config.merge_method == "diff" else 2 * d
        self.proj_signal = ProjectionHead(merged_width, d, config.dropout_rate, init)
        self.text_encoder = _TextEncoder(config, len(vocab), init)
        self.proj_text = ProjectionHead(d, d, config.dropout_rate, init)

        self._params: dict[str, Tensor] = {}
        self._register("signal", self.signal_encoder.params())
        if self.cross is not None:
            self._register("cross", self.cross.params())
        self._register("proj_signal", self.proj_signal.params())
        self._register("text", self.text_encoder.params())
        self._register("proj_text", self.proj_text.params())
        if config.freeze_text_encoder:
            for name, tensor in self._params.items():
                if name.startswith("text."):
                    tensor.requires_grad = False

    def _register(self, prefix: str, entries):
        for name, tensor in entries:
            self._params[f"{prefix}.{name}"] = tensor

    def parameters(self) -> dict[str, Tensor]:
        return dict(self._params)

    def group_of(self, name: str) -> str:
        top = name.split(".", 1)[0]
        if top in ("proj_signal", "proj_text"):
            return "projection"
        if top in ("signal", "cross"):
            return "signal"
        return "text"

    def trainable(self, name: str) -> bool:
        if self.config.freeze_text_encoder and name.startswith("text."):
            return False
        return True

    def zero_grad(self) -> None:
        for t in self._params.values():
            t.grad = None

    # ---- forward passes ----

    def _check_length(self, values: np.ndarray) -> None:
        if values.shape[-1] != self.config.series_length:
            raise ValueError(f"series length {values.shape[-1]} does not match configured {self.config.series_length}")

    def _pool(self, tokens: Tensor) -> Tensor:
        if self.config.pooling == "summary":
            return tokens[:, 0, :]
        return tokens.mean(axis=1)

    def encode_signal(self, values: np.ndarray, ctx: RunContext | None = None) -> tuple[Tensor, Tensor]:
        """Token sequence and pooled summary for a (N, length) batch."""
        ctx = ctx or RunContext()
        values = np.atleast_2d(np.asarray(values, dtype=np.float64))
        self._check_length(values)
        tokens = self.signal_encoder(Tensor(values), ctx)
        return tokens, self._pool(tokens)

    def embed_pairs(self, ref: np.ndarray, tgt: np.ndarray, ctx: RunContext | None = None) -> Tensor:
        """Merged pair embeddings (N, d), not yet L2-normalized."""
        ctx = ctx or RunContext()
        tok_ref, _ = self.encode_signal(ref, ctx)
        tok_tgt, _ = self.encode_signal(tgt, ctx)
        if self.cross is not None:
            # Symmetric residual cross-attention with shared weights.
            attended_ref = tok_ref + self.cross(tok_ref, tok_tgt)
            attended_tgt = tok_tgt + self.cross(tok_tgt, tok_ref)
            tok_ref, tok_tgt = attended_ref, attended_tgt
        z_ref = self._pool(tok_ref)
        z_tgt = self._pool(tok_tgt)
        merged = merge(z_ref, z_tgt, self.config.merge_method)
        return self.proj_signal(merged, ctx)

    def embed_texts(self, token_ids: list[list[int]], ctx: RunContext | None = None) -> Tensor:
        """Query embeddings (N, d), not yet L2-normalized."""
        ctx = ctx or RunContext()
        if not token_ids or any(len(ids) == 0 for ids in token_ids):
            raise ValueError("every text must have at least one token")
        width = max(len(ids) for ids in token_ids)
        batch = np.full((len(token_ids), width), PAD_ID, dtype=np.int64)
        for i, ids in enumerate(token_ids):
            batch[i, : len(ids)] = ids
        tokens, mask = self.text_encoder(batch, ctx)
        if self.config.pooling == "summary":
            pooled = tokens[:, 0, :]
        else:
            # Mean over real tokens only; padded positions contribute zero.
            weights = mask / mask.sum(axis=1, keepdims=True)
            pooled = (tokens * Tensor(weights[:, :, None])).sum(axis=1)
        return self.proj_text(pooled, ctx)


def merge(z_ref: Tensor, z_tgt: Tensor, method: str) -> Tensor:
    """Combine pooled pair embeddings: target-minus-reference or concatenation."""
    if z_ref.shape != z_tgt.shape:
        raise ValueError("merge requires equal widths")
    if method == "diff":
        return z_tgt - z_ref
    if method == "concat":
        return concatenate([z_ref, z_tgt], axis=-1)
    raise ValueError(f"unknown merge method {method!r}")
