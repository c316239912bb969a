"""Reverse-mode differentiation tape over float64 numpy arrays.

Every differentiable quantity is a :class:`Var` holding a value and, after
:func:`backward`, the gradient of the scalar loss with respect to it.  Ops
build the tape; ``backward`` walks it once in reverse topological order.
All arithmetic is 64-bit so the finite-difference tolerance of the gradient
oracle stays meaningful.
"""

from contextlib import contextmanager

import numpy as np

from ..errors import PreconditionError, ShapeError

_grad_enabled = True


@contextmanager
def no_grad():
    """Disable tape recording inside the block (value-only evaluation)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


class Var:
    """A tape node: float64 value, accumulated grad, and a vjp closure."""

    __slots__ = ("value", "grad", "_parents", "_vjp")

    def __init__(self, value, _parents=(), _vjp=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self._parents = _parents
        self._vjp = _vjp

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Var(shape={self.value.shape})"


def _wrap(x):
    return x if isinstance(x, Var) else Var(x)


def _node(value, parents, vjp):
    if not _grad_enabled:
        return Var(value)
    return Var(value, _parents=parents, _vjp=vjp)


def _unbroadcast(grad, shape):
    """Sum a broadcast gradient back down to the original shape."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def backward(loss: Var) -> None:
    """Accumulate d(loss)/d(node) into ``grad`` of every node on the tape.

    ``loss`` must be scalar.  Gradients add up across uses, so reusing a
    tensor on several paths (shortcuts, shared attention values) is exact.
    """
    if loss.value.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.value.shape}")

    order: list[Var] = []
    seen: set[int] = set()
    stack: list[tuple[Var, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen:
                stack.append((parent, False))

    loss.grad = np.ones_like(loss.value)
    for node in reversed(order):
        if node._vjp is None or node.grad is None:
            continue
        for parent, g in zip(node._parents, node._vjp(node.grad)):
            if g is None:
                continue
            # accumulation allocates, so sharing/view grads are never mutated
            parent.grad = g if parent.grad is None else parent.grad + g


# ---------------------------------------------------------------------------
# primitive ops
# ---------------------------------------------------------------------------

def add(a, b):
    a, b = _wrap(a), _wrap(b)
    out = a.value + b.value

    def vjp(g):
        return _unbroadcast(g, a.value.shape), _unbroadcast(g, b.value.shape)

    return _node(out, (a, b), vjp)


def sub(a, b):
    a, b = _wrap(a), _wrap(b)
    out = a.value - b.value

    def vjp(g):
        return _unbroadcast(g, a.value.shape), _unbroadcast(-g, b.value.shape)

    return _node(out, (a, b), vjp)


def mul(a, b):
    a, b = _wrap(a), _wrap(b)
    out = a.value * b.value

    def vjp(g):
        return (
            _unbroadcast(g * b.value, a.value.shape),
            _unbroadcast(g * a.value, b.value.shape),
        )

    return _node(out, (a, b), vjp)


def div(a, b):
    a, b = _wrap(a), _wrap(b)
    out = a.value / b.value

    def vjp(g):
        return (
            _unbroadcast(g / b.value, a.value.shape),
            _unbroadcast(-g * a.value / (b.value * b.value), b.value.shape),
        )

    return _node(out, (a, b), vjp)


def scale(a, c: float):
    a = _wrap(a)
    out = a.value * c

    def vjp(g):
        return (g * c,)

    return _node(out, (a,), vjp)


def matmul(a, b):
    a, b = _wrap(a), _wrap(b)
    if a.value.ndim != 2 or b.value.ndim != 2 or a.value.shape[1] != b.value.shape[0]:
        raise ShapeError(
            f"matmul mismatch: left {a.value.shape} vs right {b.value.shape}"
        )
    out = a.value @ b.value

    def vjp(g):
        return g @ b.value.T, a.value.T @ g

    return _node(out, (a, b), vjp)


def transpose(a):
    a = _wrap(a)

    def vjp(g):
        return (g.T,)

    return _node(a.value.T, (a,), vjp)


def relu(a):
    a = _wrap(a)
    mask = a.value > 0
    out = np.where(mask, a.value, 0.0)

    def vjp(g):
        return (g * mask,)

    return _node(out, (a,), vjp)


def _stable_sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(a):
    a = _wrap(a)
    out = _stable_sigmoid(a.value)

    def vjp(g):
        return (g * out * (1.0 - out),)

    return _node(out, (a,), vjp)


def split_gate(a):
    """Gate ReLU output: 0 stays 0, positive entries map through sigmoid.

    Defined only on nonnegative input; positive entries land in (0.5, 1).
    """
    a = _wrap(a)
    if np.any(a.value < 0):
        raise PreconditionError("split requires nonnegative input (a ReLU output)")
    pos = a.value > 0
    sig = _stable_sigmoid(a.value)
    out = np.where(pos, sig, 0.0)

    def vjp(g):
        return (g * np.where(pos, sig * (1.0 - sig), 0.0),)

    return _node(out, (a,), vjp)


def vsum(a, axis=None, keepdims=False):
    a = _wrap(a)
    out = a.value.sum(axis=axis, keepdims=keepdims)

    def vjp(g):
        if axis is None:
            return (np.broadcast_to(g, a.value.shape).copy(),)
        gg = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(gg, a.value.shape).copy(),)

    return _node(out, (a,), vjp)


def vmean(a, axis=None, keepdims=False):
    a = _wrap(a)
    n = a.value.size if axis is None else a.value.shape[axis]
    return scale(vsum(a, axis=axis, keepdims=keepdims), 1.0 / n)


def sqrt(a):
    a = _wrap(a)
    out = np.sqrt(a.value)

    def vjp(g):
        return (g * 0.5 / out,)

    return _node(out, (a,), vjp)


def concat(parts, axis=1):
    parts = [_wrap(p) for p in parts]
    out = np.concatenate([p.value for p in parts], axis=axis)
    widths = [p.value.shape[axis] for p in parts]

    def vjp(g):
        grads = []
        start = 0
        for w in widths:
            index = [slice(None)] * g.ndim
            index[axis] = slice(start, start + w)
            grads.append(g[tuple(index)])
            start += w
        return tuple(grads)

    return _node(out, tuple(parts), vjp)


def bce_loss_graph(prob: Var, labels: np.ndarray, clamp: float = 1e-12) -> Var:
    """Mean binary cross-entropy with probability clamping, as a tape node.

    The gradient is zero where the clamp is active, matching the loss as
    actually computed.
    """
    prob = _wrap(prob)
    labels = np.asarray(labels, dtype=np.float64)
    if prob.value.shape != labels.shape:
        raise ShapeError(
            f"bce_loss mismatch: prob {prob.value.shape} vs labels {labels.shape}"
        )
    p = np.clip(prob.value, clamp, 1.0 - clamp)
    inside = (prob.value > clamp) & (prob.value < 1.0 - clamp)
    n = labels.size
    out = -np.mean(labels * np.log(p) + (1.0 - labels) * np.log1p(-p))

    def vjp(g):
        dp = (-(labels / p) + (1.0 - labels) / (1.0 - p)) / n
        return (g * np.where(inside, dp, 0.0),)

    return _node(out, (prob,), vjp)
