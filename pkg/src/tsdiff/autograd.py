"""Reverse-mode automatic differentiation on numpy arrays.

A Tensor wraps a float64 ndarray plus the closure that maps its output
gradient to parent gradients. backward() walks the tape in reverse
topological order. Everything runs in 64-bit so analytic gradients can be
validated against central finite differences at tight tolerances.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf as _erf

_TWO_OVER_SQRT_PI = 2.0 / np.sqrt(np.pi)


def _sum_to_shape(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Undo numpy broadcasting: reduce g back down to `shape`."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_grad_fn")

    def __init__(self, data, requires_grad: bool = False, _parents: tuple = (), _grad_fn=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad or any(p.requires_grad for p in _parents)
        self._parents = _parents if self.requires_grad else ()
        self._grad_fn = _grad_fn if self.requires_grad else None
        self.grad: np.ndarray | None = None

    # ---- graph mechanics ----

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def backward(self, grad: np.ndarray | None = None) -> None:
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without an explicit gradient needs a scalar output")
            grad = np.ones_like(self.data)
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                stack.append((p, False))
        self.grad = grad if self.grad is None else self.grad + grad
        for node in reversed(order):
            if node._grad_fn is None or node.grad is None:
                continue
            for parent, g in zip(node._parents, node._grad_fn(node.grad)):
                if g is None or not parent.requires_grad:
                    continue
                parent.grad = g if parent.grad is None else parent.grad + g

    # ---- elementwise arithmetic ----

    def __add__(self, other) -> "Tensor":
        other = as_tensor(other)
        return Tensor(
            self.data + other.data,
            _parents=(self, other),
            _grad_fn=lambda g: (_sum_to_shape(g, self.shape), _sum_to_shape(g, other.shape)),
        )

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        return Tensor(-self.data, _parents=(self,), _grad_fn=lambda g: (-g,))

    def __sub__(self, other) -> "Tensor":
        return self + (-as_tensor(other))

    def __rsub__(self, other) -> "Tensor":
        return as_tensor(other) + (-self)

    def __mul__(self, other) -> "Tensor":
        other = as_tensor(other)
        return Tensor(
            self.data * other.data,
            _parents=(self, other),
            _grad_fn=lambda g: (
                _sum_to_shape(g * other.data, self.shape),
                _sum_to_shape(g * self.data, other.shape),
            ),
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        other = as_tensor(other)
        return Tensor(
            self.data / other.data,
            _parents=(self, other),
            _grad_fn=lambda g: (
                _sum_to_shape(g / other.data, self.shape),
                _sum_to_shape(-g * self.data / (other.data * other.data), other.shape),
            ),
        )

    def __rtruediv__(self, other) -> "Tensor":
        return as_tensor(other) / self

    def __pow__(self, exponent: float) -> "Tensor":
        if not isinstance(exponent, (int, float)):
            raise TypeError("only scalar exponents are supported")
        return Tensor(
            self.data**exponent,
            _parents=(self,),
            _grad_fn=lambda g: (g * exponent * self.data ** (exponent - 1),),
        )

    # ---- shape manipulation ----

    def reshape(self, *shape: int) -> "Tensor":
        return Tensor(
            self.data.reshape(*shape),
            _parents=(self,),
            _grad_fn=lambda g: (g.reshape(self.shape),),
        )

    def transpose(self, *axes: int) -> "Tensor":
        inverse = tuple(np.argsort(axes))
        return Tensor(
            self.data.transpose(*axes),
            _parents=(self,),
            _grad_fn=lambda g: (g.transpose(*inverse),),
        )

    def swapaxes(self, a: int, b: int) -> "Tensor":
        return Tensor(
            self.data.swapaxes(a, b),
            _parents=(self,),
            _grad_fn=lambda g: (g.swapaxes(a, b),),
        )

    def __getitem__(self, index) -> "Tensor":
        def grad_fn(g):
            full = np.zeros(self.shape)
            np.add.at(full, index, g)
            return (full,)

        return Tensor(self.data[index], _parents=(self,), _grad_fn=grad_fn)

    # ---- reductions ----

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        def grad_fn(g):
            if axis is None:
                return (np.broadcast_to(g, self.shape).copy(),)
            if not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, self.shape).copy(),)

        return Tensor(self.data.sum(axis=axis, keepdims=keepdims), _parents=(self,), _grad_fn=grad_fn)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    # ---- transcendental ----

    def exp(self) -> "Tensor":
        out_data = np.exp(self.data)
        return Tensor(out_data, _parents=(self,), _grad_fn=lambda g: (g * out_data,))

    def log(self) -> "Tensor":
        return Tensor(np.log(self.data), _parents=(self,), _grad_fn=lambda g: (g / self.data,))

    def sqrt(self) -> "Tensor":
        out_data = np.sqrt(self.data)
        return Tensor(out_data, _parents=(self,), _grad_fn=lambda g: (g * 0.5 / out_data,))

    def erf(self) -> "Tensor":
        return Tensor(
            _erf(self.data),
            _parents=(self,),
            _grad_fn=lambda g: (g * _TWO_OVER_SQRT_PI * np.exp(-self.data * self.data),),
        )

    # ---- linear algebra ----

    def __matmul__(self, other) -> "Tensor":
        other = as_tensor(other)

        def grad_fn(g):
            ga = _sum_to_shape(np.matmul(g, other.data.swapaxes(-1, -2)), self.shape)
            gb = _sum_to_shape(np.matmul(self.data.swapaxes(-1, -2), g), other.shape)
            return ga, gb

        return Tensor(np.matmul(self.data, other.data), _parents=(self, other), _grad_fn=grad_fn)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def parameter(data) -> Tensor:
    """Leaf tensor that receives gradients."""
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True)


def concatenate(tensors: list[Tensor], axis: int = 0) -> Tensor:
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def grad_fn(g):
        return tuple(np.split(g, splits, axis=axis))

    return Tensor(
        np.concatenate([t.data for t in tensors], axis=axis),
        _parents=tuple(tensors),
        _grad_fn=grad_fn,
    )


def take_rows(table: Tensor, ids: np.ndarray) -> Tensor:
    """Row lookup (embedding gather); scatter-adds gradients back."""
    ids = np.asarray(ids)

    def grad_fn(g):
        full = np.zeros(table.shape)
        np.add.at(full, ids, g)
        return (full,)

    return Tensor(table.data[ids], _parents=(table,), _grad_fn=grad_fn)


def softmax(t: Tensor, axis: int = -1) -> Tensor:
    """Softmax with detached max subtraction for stability."""
    shifted = t - Tensor(np.max(t.data, axis=axis, keepdims=True))
    e = shifted.exp()
    return e / e.sum(axis=axis, keepdims=True)


def log_softmax(t: Tensor, axis: int = -1) -> Tensor:
    shifted = t - Tensor(np.max(t.data, axis=axis, keepdims=True))
    return shifted - shifted.exp().sum(axis=axis, keepdims=True).log()


def gelu(t: Tensor) -> Tensor:
    """Exact GELU: x * Phi(x) via the error function."""
    return t * 0.5 * ((t * (1.0 / np.sqrt(2.0))).erf() + 1.0)


def conv1d(x: Tensor, weight: Tensor, bias: Tensor, stride: int, padding: int) -> Tensor:
    """1-D convolution, x: (N, C_in, L), weight: (C_out, C_in, K) -> (N, C_out, L_out).

    Forward uses an im2col strided view; backward scatters through the same
    window geometry. Hand-written because window extraction is not covered by
    the primitive ops above.
    """
    n, c_in, length = x.shape
    c_out, c_in_w, k = weight.shape
    if c_in != c_in_w:
        raise ValueError(f"conv1d channel mismatch: input {c_in}, weight {c_in_w}")
    l_out = (length + 2 * padding - k) // stride + 1
    if l_out < 1:
        raise ValueError("conv1d output would be empty")

    padded = np.pad(x.data, ((0, 0), (0, 0), (padding, padding)))
    s0, s1, s2 = padded.strides
    windows = np.lib.stride_tricks.as_strided(
        padded, shape=(n, c_in, l_out, k), strides=(s0, s1, s2 * stride, s2), writeable=False
    )
    cols = windows.transpose(0, 2, 1, 3).reshape(n, l_out, c_in * k)
    w_flat = weight.data.reshape(c_out, c_in * k)
    out_data = np.matmul(cols, w_flat.T).transpose(0, 2, 1) + bias.data[None, :, None]

    def grad_fn(g):
        g_flat = g.transpose(0, 2, 1)  # (N, L_out, C_out)
        g_w = np.tensordot(g_flat, cols, axes=([0, 1], [0, 1])).reshape(c_out, c_in, k)
        g_b = g.sum(axis=(0, 2))
        g_cols = np.matmul(g_flat, w_flat)  # (N, L_out, C_in*K)
        g_windows = g_cols.reshape(n, l_out, c_in, k).transpose(0, 2, 1, 3)
        g_padded = np.zeros_like(padded)
        for j in range(k):
            positions = np.arange(l_out) * stride + j
            np.add.at(g_padded, (slice(None), slice(None), positions), g_windows[:, :, :, j])
        g_x = g_padded[:, :, padding : padding + length] if padding else g_padded
        return g_x, g_w, g_b

    return Tensor(out_data, _parents=(x, weight, bias), _grad_fn=grad_fn)
