"""Dense tensors with reverse-mode automatic differentiation.

Every op records a closure that pushes gradients into its parents; calling
``backward`` on a scalar loss walks the graph once in reverse topological
order.  Traversal and accumulation order are fixed by construction, so
identical graphs produce bitwise-identical gradients.

There is no implicit broadcasting: elementwise ops require exact shape
agreement and broadcasting happens only through the explicit ``expand`` op.
"""

from __future__ import annotations

import contextlib

import numpy as np


class ShapeError(ValueError):
    """Raised when an op receives shape-incompatible inputs."""


class GradError(RuntimeError):
    """Raised on invalid backward calls (non-scalar loss, missing grads)."""


_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable graph recording inside the block (inference mode)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def grad_enabled() -> bool:
    return _grad_enabled


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    # -- graph construction -------------------------------------------------

    @staticmethod
    def _result(data: np.ndarray, parents: tuple["Tensor", ...], backward_fn):
        out = Tensor(data)
        if _grad_enabled and any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = parents
            out._backward = backward_fn
        return out

    def _accumulate(self, g: np.ndarray) -> None:
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = g.copy() if isinstance(g, np.ndarray) else np.asarray(g)
        else:
            self.grad += g

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, requires_grad={self.requires_grad})"

    # -- backward ------------------------------------------------------------

    def backward(self) -> None:
        """Reverse-mode pass from a scalar tensor into all reachable leaves."""
        if self.data.size != 1:
            raise GradError(f"backward requires a scalar loss, got shape {self.data.shape}")
        order = _topo_order(self)
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None:
                node._backward(node.grad)

    def free_graph(self) -> None:
        """Drop closures/parent links so the step's graph is collectable."""
        for node in _topo_order(self):
            node._parents = ()
            node._backward = None

    # -- operator sugar --------------------------------------------------

    def __add__(self, other):
        return add(self, other) if isinstance(other, Tensor) else add_const(self, other)

    def __sub__(self, other):
        return sub(self, other) if isinstance(other, Tensor) else add_const(self, -other)

    def __mul__(self, other):
        return mul(self, other) if isinstance(other, Tensor) else mul_const(self, other)

    def __neg__(self):
        return mul_const(self, -1.0)

    __radd__ = __add__
    __rmul__ = __mul__


def _topo_order(root: Tensor) -> list[Tensor]:
    # Iterative DFS; rollout graphs exceed Python's recursion limit.
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited:
                stack.append((p, False))
    return order


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _check_same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"{op}: shape mismatch {a.data.shape} vs {b.data.shape}")


# -- elementwise ---------------------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_same_shape("add", a, b)

    def backward(g):
        a._accumulate(g)
        b._accumulate(g)

    return Tensor._result(a.data + b.data, (a, b), backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_same_shape("sub", a, b)

    def backward(g):
        a._accumulate(g)
        b._accumulate(-g)

    return Tensor._result(a.data - b.data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_same_shape("mul", a, b)

    def backward(g):
        a._accumulate(g * b.data)
        b._accumulate(g * a.data)

    return Tensor._result(a.data * b.data, (a, b), backward)


def add_const(a: Tensor, c: float) -> Tensor:
    def backward(g):
        a._accumulate(g)

    return Tensor._result(a.data + c, (a,), backward)


def mul_const(a: Tensor, c: float) -> Tensor:
    def backward(g):
        a._accumulate(g * c)

    return Tensor._result(a.data * c, (a,), backward)


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0

    def backward(g):
        a._accumulate(g * mask)

    return Tensor._result(a.data * mask, (a,), backward)


def leaky_relu(a: Tensor, slope: float = 0.1) -> Tensor:
    factor = np.where(a.data > 0, a.data.dtype.type(1), a.data.dtype.type(slope))

    def backward(g):
        a._accumulate(g * factor)

    return Tensor._result(a.data * factor, (a,), backward)


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)

    def backward(g):
        a._accumulate(g * (1.0 - y * y))

    return Tensor._result(y, (a,), backward)


def clamp_passthrough(a: Tensor, lo: float, hi: float) -> Tensor:
    """Clamp values to [lo, hi] with a straight-through (identity) gradient.

    The pass-through gradient intentionally disagrees with finite differences
    at saturated points; gradcheck must probe interior values.
    """

    def backward(g):
        a._accumulate(g)

    return Tensor._result(np.clip(a.data, lo, hi), (a,), backward)


# -- shape ops ------------------------------------------------------------


def reshape(a: Tensor, shape) -> Tensor:
    shape = tuple(shape)
    old = a.data.shape

    def backward(g):
        a._accumulate(g.reshape(old))

    return Tensor._result(a.data.reshape(shape), (a,), backward)


def transpose(a: Tensor, axes) -> Tensor:
    axes = tuple(axes)
    inv = tuple(np.argsort(axes))

    def backward(g):
        a._accumulate(g.transpose(inv))

    return Tensor._result(a.data.transpose(axes), (a,), backward)


def expand(a: Tensor, shape) -> Tensor:
    """Broadcast size-1 axes up to ``shape``; the only broadcasting allowed."""
    shape = tuple(shape)
    old = a.data.shape
    if len(old) != len(shape):
        raise ShapeError(f"expand: rank mismatch {old} vs {shape}")
    axes = []
    for i, (s_old, s_new) in enumerate(zip(old, shape)):
        if s_old == s_new:
            continue
        if s_old != 1:
            raise ShapeError(f"expand: cannot expand axis {i} from {s_old} to {s_new}")
        axes.append(i)
    axes = tuple(axes)

    def backward(g):
        a._accumulate(g.sum(axis=axes, keepdims=True) if axes else g)

    return Tensor._result(np.broadcast_to(a.data, shape).copy(), (a,), backward)


def concat(tensors, axis: int) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(lo, hi)
            t._accumulate(g[tuple(idx)])

    return Tensor._result(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), backward)


def take_rows(a: Tensor, idx: np.ndarray) -> Tensor:
    """Gather rows along axis 0; backward scatter-adds duplicates."""
    idx = np.asarray(idx, dtype=np.intp)

    def backward(g):
        buf = np.zeros_like(a.data)
        flat = buf.reshape(buf.shape[0], -1)
        np.add.at(flat, idx, g.reshape(g.shape[0], -1))
        a._accumulate(buf)

    return Tensor._result(a.data[idx], (a,), backward)


def crop_hw(a: Tensor, h: int, w: int) -> Tensor:
    """Keep the top-left h×w window of an NCHW tensor."""
    if a.data.ndim != 4:
        raise ShapeError(f"crop_hw expects NCHW, got {a.data.shape}")
    H, W = a.data.shape[2:]
    if h > H or w > W:
        raise ShapeError(f"crop_hw: target ({h},{w}) exceeds ({H},{W})")

    def backward(g):
        buf = np.zeros_like(a.data)
        buf[:, :, :h, :w] = g
        a._accumulate(buf)

    return Tensor._result(a.data[:, :, :h, :w].copy(), (a,), backward)


# -- reductions ------------------------------------------------------------


def _norm_axis(axis, ndim):
    if axis is None:
        return None
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(ax % ndim for ax in axis)


def tsum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axis = _norm_axis(axis, a.data.ndim)

    def backward(g):
        if axis is None:
            a._accumulate(np.broadcast_to(g, a.data.shape).copy())
            return
        if not keepdims:
            g = np.expand_dims(g, axis)
        a._accumulate(np.broadcast_to(g, a.data.shape).copy())

    return Tensor._result(a.data.sum(axis=axis, keepdims=keepdims), (a,), backward)


def tmean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axis = _norm_axis(axis, a.data.ndim)
    if axis is None:
        count = a.data.size
    else:
        count = int(np.prod([a.data.shape[ax] for ax in axis]))
    scale = 1.0 / count

    def backward(g):
        if axis is None:
            a._accumulate(np.broadcast_to(g * scale, a.data.shape).copy())
            return
        gg = g if keepdims else np.expand_dims(g, axis)
        a._accumulate(np.broadcast_to(gg * scale, a.data.shape).copy())

    return Tensor._result(a.data.mean(axis=axis, keepdims=keepdims), (a,), backward)


def tmax(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axis = _norm_axis(axis, a.data.ndim)
    out = a.data.max(axis=axis, keepdims=True)
    mask = a.data == out  # ties share gradient; probe away from ties in gradcheck

    def backward(g):
        gg = g if (keepdims or axis is None) else np.expand_dims(g, axis)
        if axis is None:
            gg = np.broadcast_to(gg.reshape((1,) * a.data.ndim), a.data.shape)
        a._accumulate(mask * np.broadcast_to(gg, a.data.shape))

    data = out if keepdims else out.reshape(a.data.max(axis=axis, keepdims=False).shape)
    return Tensor._result(data, (a,), backward)


# -- linear algebra --------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise ShapeError(f"matmul: incompatible {a.data.shape} @ {b.data.shape}")

    def backward(g):
        a._accumulate(g @ b.data.T)
        b._accumulate(a.data.T @ g)

    return Tensor._result(a.data @ b.data, (a, b), backward)


# -- losses ----------------------------------------------------------------


def mse(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape("mse", a, b)
    d = sub(a, b)
    return tmean(mul(d, d))


def softmax_cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean cross-entropy over all positions.

    ``logits`` is (N, K) or (N, K, H, W); ``labels`` holds integer class ids
    of shape (N,) or (N, H, W).
    """
    x = logits.data
    if x.ndim not in (2, 4):
        raise ShapeError(f"softmax_cross_entropy: expected (N,K) or (N,K,H,W), got {x.shape}")
    labels = np.asarray(labels)
    if labels.shape != x.shape[:1] + x.shape[2:]:
        raise ShapeError(f"softmax_cross_entropy: labels {labels.shape} do not match logits {x.shape}")
    xm = x - x.max(axis=1, keepdims=True)
    ex = np.exp(xm)
    probs = ex / ex.sum(axis=1, keepdims=True)
    onehot = np.moveaxis(np.eye(x.shape[1], dtype=x.dtype)[labels], -1, 1)
    count = labels.size
    loss = -(onehot * np.log(np.maximum(probs, 1e-30))).sum() / count

    def backward(g):
        logits._accumulate(g * (probs - onehot) / count)

    return Tensor._result(np.asarray(loss, dtype=x.dtype), (logits,), backward)
