"""Neural-network building blocks on top of the autograd Tensor.

Layers hold their parameters as autograd leaves and expose params() as
(name, tensor) pairs so composites can register them under a prefix.
Initialization is uniform fan-in scaling for weights, zeros for biases,
identity affine for layer norms; every draw comes from the Init's generator
in construction order, which makes parameter init reproducible per seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autograd import Tensor, conv1d, gelu, parameter, softmax

MASK_BIAS = -1e30


@dataclass
class RunContext:
    """Per-forward-pass mode: training enables dropout via the context rng."""

    training: bool = False
    rng: np.random.Generator | None = None


def dropout(x: Tensor, rate: float, ctx: RunContext) -> Tensor:
    if not ctx.training or rate <= 0.0:
        return x
    if ctx.rng is None:
        raise ValueError("training-mode dropout needs a context rng")
    keep = (ctx.rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * Tensor(keep)


class Init:
    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def weight(self, shape: tuple[int, ...], fan_in: int) -> Tensor:
        bound = 1.0 / np.sqrt(fan_in)
        return parameter(self.rng.uniform(-bound, bound, shape))


class Linear:
    def __init__(self, d_in: int, d_out: int, init: Init):
        self.w = init.weight((d_in, d_out), fan_in=d_in)
        self.b = parameter(np.zeros(d_out))

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.w + self.b

    def params(self):
        return [("w", self.w), ("b", self.b)]


class LayerNorm:
    def __init__(self, dim: int, eps: float = 1e-5):
        self.gamma = parameter(np.ones(dim))
        self.beta = parameter(np.zeros(dim))
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        centered = x - x.mean(axis=-1, keepdims=True)
        var = (centered * centered).mean(axis=-1, keepdims=True)
        return centered / (var + self.eps).sqrt() * self.gamma + self.beta

    def params(self):
        return [("gamma", self.gamma), ("beta", self.beta)]


class Conv1d:
    def __init__(self, c_in: int, c_out: int, kernel: int, stride: int, init: Init):
        self.w = init.weight((c_out, c_in, kernel), fan_in=c_in * kernel)
        self.b = parameter(np.zeros(c_out))
        self.stride = stride
        self.padding = kernel // 2

    def __call__(self, x: Tensor) -> Tensor:
        return conv1d(x, self.w, self.b, self.stride, self.padding)

    def params(self):
        return [("w", self.w), ("b", self.b)]


class MultiHeadAttention:
    """Scaled dot-product attention; q and kv may come from different sequences."""

    def __init__(self, dim: int, heads: int, init: Init):
        if dim % heads != 0:
            raise ValueError(f"dim {dim} not divisible by {heads} heads")
        self.dim = dim
        self.heads = heads
        self.wq = Linear(dim, dim, init)
        self.wk = Linear(dim, dim, init)
        self.wv = Linear(dim, dim, init)
        self.wo = Linear(dim, dim, init)

    def __call__(self, q: Tensor, kv: Tensor, key_mask: np.ndarray | None = None) -> Tensor:
        if q.shape[-1] != self.dim or kv.shape[-1] != self.dim:
            raise ValueError("attention width mismatch")
        n, t_q, _ = q.shape
        t_k = kv.shape[1]
        d_head = self.dim // self.heads

        def split(t: Tensor, tokens: int) -> Tensor:
            return t.reshape(n, tokens, self.heads, d_head).transpose(0, 2, 1, 3)

        qh = split(self.wq(q), t_q)
        kh = split(self.wk(kv), t_k)
        vh = split(self.wv(kv), t_k)
        scores = (qh @ kh.swapaxes(-1, -2)) * (1.0 / np.sqrt(d_head))
        if key_mask is not None:
            # key_mask: (N, T_k) booleans, True = real token. Padded keys get a
            # large negative bias so their softmax weight underflows to zero.
            bias = np.where(key_mask[:, None, None, :], 0.0, MASK_BIAS)
            scores = scores + Tensor(bias)
        mixed = softmax(scores, axis=-1) @ vh
        out = mixed.transpose(0, 2, 1, 3).reshape(n, t_q, self.dim)
        return self.wo(out)

    def params(self):
        out = []
        for name, lin in (("wq", self.wq), ("wk", self.wk), ("wv", self.wv), ("wo", self.wo)):
            out.extend((f"{name}.{k}", t) for k, t in lin.params())
        return out


class TransformerLayer:
    """Post-norm encoder layer: self-attention and feed-forward sublayers."""

    def __init__(self, dim: int, heads: int, ff_dim: int, dropout_rate: float, init: Init):
        self.attn = MultiHeadAttention(dim, heads, init)
        self.ln1 = LayerNorm(dim)
        self.ff1 = Linear(dim, ff_dim, init)
        self.ff2 = Linear(ff_dim, dim, init)
        self.ln2 = LayerNorm(dim)
        self.dropout_rate = dropout_rate

    def __call__(self, x: Tensor, ctx: RunContext, key_mask: np.ndarray | None = None) -> Tensor:
        x = self.ln1(x + dropout(self.attn(x, x, key_mask), self.dropout_rate, ctx))
        x = self.ln2(x + dropout(self.ff2(gelu(self.ff1(x))), self.dropout_rate, ctx))
        return x

    def params(self):
        out = []
        for prefix, sub in (("attn", self.attn), ("ln1", self.ln1), ("ff1", self.ff1), ("ff2", self.ff2), ("ln2", self.ln2)):
            out.extend((f"{prefix}.{k}", t) for k, t in sub.params())
        return out


class ProjectionHead:
    """Two linear layers with GELU, dropout, residual, and layer norm."""

    def __init__(self, d_in: int, d_out: int, dropout_rate: float, init: Init):
        self.lin1 = Linear(d_in, d_out, init)
        self.lin2 = Linear(d_out, d_out, init)
        self.ln = LayerNorm(d_out)
        self.dropout_rate = dropout_rate

    def __call__(self, v: Tensor, ctx: RunContext) -> Tensor:
        h = self.lin1(v)
        return self.ln(h + dropout(self.lin2(gelu(h)), self.dropout_rate, ctx))

    def params(self):
        out = []
        for prefix, sub in (("lin1", self.lin1), ("lin2", self.lin2), ("ln", self.ln)):
            out.extend((f"{prefix}.{k}", t) for k, t in sub.params())
        return out
