"""Adam with per-group learning rates and global-norm gradient clipping."""

from __future__ import annotations

import numpy as np

from .autograd import Tensor


class Adam:
    """First-order adaptive-moment updates over a named parameter dict.

    lr_of maps a parameter name to its learning rate; names mapped to 0 are
    left bit-unchanged (no moment updates either). Clipping rescales all
    participating gradients by a shared factor when their joint norm exceeds
    clip_norm.
    """

    def __init__(
        self,
        params: dict[str, Tensor],
        lr_of,
        clip_norm: float | None = 1.0,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ):
        self.params = {name: t for name, t in params.items() if t.requires_grad}
        self.lr_of = lr_of
        self.clip_norm = clip_norm
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self.m = {name: np.zeros_like(t.data) for name, t in self.params.items()}
        self.v = {name: np.zeros_like(t.data) for name, t in self.params.items()}

    def step(self) -> float:
        """Apply one update; returns the pre-clip global gradient norm."""
        active = [
            (name, t) for name, t in self.params.items() if t.grad is not None and self.lr_of(name) > 0.0
        ]
        total_sq = 0.0
        for _, t in active:
            total_sq += float(np.sum(t.grad * t.grad))
        global_norm = float(np.sqrt(total_sq))
        scale = 1.0
        if self.clip_norm is not None and global_norm > self.clip_norm:
            scale = self.clip_norm / global_norm

        self.step_count += 1
        bc1 = 1.0 - self.beta1**self.step_count
        bc2 = 1.0 - self.beta2**self.step_count
        for name, t in active:
            g = t.grad * scale
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            if self.weight_decay > 0.0:
                update = update + self.weight_decay * t.data
            t.data = t.data - self.lr_of(name) * update
        return global_norm
