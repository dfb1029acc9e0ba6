"""Contrastive objectives aligning text and signal-pair embeddings.

The supervised form scores a temperature-scaled text/signal dot-product
matrix against targets derived from relationship labels; the self-supervised
form uses diagonal targets. Both are differentiable through the autograd
Tensor and average the text-to-signal and signal-to-text directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autograd import Tensor, as_tensor, log_softmax


@dataclass
class LogitMatrix:
    m: Tensor  # N x N, rows = texts, columns = signals
    tau: float


@dataclass(frozen=True)
class TargetMatrix:
    binary: np.ndarray
    normalized: np.ndarray


def l2_normalize(z: Tensor | np.ndarray) -> Tensor:
    """Row-wise unit normalization; a zero row means the encoder collapsed."""
    z = as_tensor(z)
    norms_sq = (z * z).sum(axis=-1, keepdims=True)
    if np.any(norms_sq.data <= 0.0):
        raise ValueError("zero-norm embedding row; cannot L2-normalize")
    return z / norms_sq.sqrt()


def logit_matrix(z_text: Tensor, z_signal: Tensor, tau: float) -> LogitMatrix:
    if tau <= 0:
        raise ValueError("temperature must be positive")
    if z_text.shape != z_signal.shape:
        raise ValueError(f"batch shape mismatch: {z_text.shape} vs {z_signal.shape}")
    return LogitMatrix(m=(z_text @ z_signal.swapaxes(-1, -2)) * (1.0 / tau), tau=tau)


def target_matrix(y_t: np.ndarray, y_s: np.ndarray) -> TargetMatrix:
    """Binary label-match matrix and its row-normalized form."""
    y_t = np.asarray(y_t)
    y_s = np.asarray(y_s)
    if y_t.ndim != 1 or y_s.ndim != 1 or len(y_t) != len(y_s):
        raise ValueError("label vectors must be 1-D and equally long")
    binary = (y_t[:, None] == y_s[None, :]).astype(np.float64)
    row_sums = binary.sum(axis=1, keepdims=True)
    if np.any(row_sums == 0):
        bad = int(np.argmin(row_sums))
        raise ValueError(f"text row {bad} (label {y_t[bad]}) has no matching signal in the batch")
    return TargetMatrix(binary=binary, normalized=binary / row_sums)


def _check_finite(m: Tensor) -> None:
    if not np.all(np.isfinite(m.data)):
        raise ValueError("non-finite logits")


def _cross_entropy(logits: Tensor, targets: np.ndarray) -> Tensor:
    n = logits.shape[0]
    picked = log_softmax(logits, axis=-1)[np.arange(n), targets]
    return -picked.mean()


def supervised_loss(
    m: LogitMatrix,
    g: TargetMatrix,
    signal_targets: str = "consistent",
    soft_targets: bool = False,
) -> Tensor:
    """Average of the text-side and signal-side cross-entropies.

    Text side: row-argmax of normalized G (ties broken to the lowest index)
    names each text's positive signal. Signal side defaults to the transposed
    reading (column-argmax of G, a text index per signal); signal_targets=
    "literal" instead reuses the row-argmax vector on the transposed logits.
    soft_targets scores the full normalized distribution instead of argmax.
    """
    _check_finite(m.m)
    n = m.m.shape[0]
    if m.m.shape != (n, n) or g.binary.shape != (n, n):
        raise ValueError("logit and target matrices must be square and matching")
    if signal_targets not in ("consistent", "literal"):
        raise ValueError(f"unknown signal_targets mode {signal_targets!r}")

    m_t = m.m.swapaxes(-1, -2)
    if soft_targets:
        g_signal = target_matrix_transposed(g)
        loss_texts = -(Tensor(g.normalized) * log_softmax(m.m, axis=-1)).sum(axis=1).mean()
        loss_signals = -(Tensor(g_signal) * log_softmax(m_t, axis=-1)).sum(axis=1).mean()
        return (loss_texts + loss_signals) * 0.5

    text_targets = np.argmax(g.normalized, axis=1)
    if signal_targets == "consistent":
        sig_targets = np.argmax(g.binary.T, axis=1)
    else:
        sig_targets = text_targets
    return (_cross_entropy(m.m, text_targets) + _cross_entropy(m_t, sig_targets)) * 0.5


def target_matrix_transposed(g: TargetMatrix) -> np.ndarray:
    """Row-normalized transpose, the signal-side soft-target distribution."""
    binary_t = g.binary.T
    sums = binary_t.sum(axis=1, keepdims=True)
    if np.any(sums == 0):
        raise ValueError("a signal column has no matching text; malformed batch")
    return binary_t / sums


def selfsup_loss(m: LogitMatrix) -> Tensor:
    """CLIP-style symmetric cross-entropy with diagonal targets."""
    _check_finite(m.m)
    n = m.m.shape[0]
    if m.m.shape != (n, n):
        raise ValueError("logit matrix must be square")
    diag = np.arange(n)
    return (_cross_entropy(m.m, diag) + _cross_entropy(m.m.swapaxes(-1, -2), diag)) * 0.5
