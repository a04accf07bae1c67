"""Reverse-mode automatic differentiation on numpy float64 arrays.

A Tensor wraps a value and, while gradients are enabled, records the op
that produced it. backward() walks the recorded graph in reverse
topological order and accumulates gradients into every reachable leaf
with requires_grad set. Everything is float64; there is no broadcasting
magic beyond what numpy itself does (gradients are summed back over
broadcast axes).
"""

from __future__ import annotations

import contextlib

import numpy as np

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable graph recording inside the block (rollout / eval fast path)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def grad_enabled() -> bool:
    return _grad_enabled


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum grad back down to `shape` after numpy broadcasting."""
    if grad.shape == shape:
        return grad
    # sum away prepended axes
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_bw")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._bw = None

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _make(data, parents, bw):
        out = Tensor(data)
        if _grad_enabled and any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = parents
            out._bw = bw
        return out

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, grad={'set' if self.grad is not None else 'none'})"

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    # -- autograd driver -------------------------------------------------------

    def backward(self, grad=None):
        if self._bw is None and not self.requires_grad:
            raise ValueError("backward() on a tensor detached from any graph")
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without explicit gradient needs a scalar")
            grad = np.ones_like(self.data)
        else:
            grad = np.asarray(grad, dtype=np.float64)

        order = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p._bw is not None or p.requires_grad:
                    stack.append((p, False))

        grads = {id(self): grad}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._bw is None:
                # leaf
                node.grad = g if node.grad is None else node.grad + g
                continue
            for parent, pg in node._bw(g):
                if pg is None:
                    continue
                key = id(parent)
                if key in grads:
                    grads[key] = grads[key] + pg
                else:
                    grads[key] = pg

    # -- elementwise arithmetic -------------------------------------------------

    def __add__(self, other):
        other = as_tensor(other)
        a, b = self, other
        return Tensor._make(
            a.data + b.data, (a, b),
            lambda g: ((a, _unbroadcast(g, a.data.shape)), (b, _unbroadcast(g, b.data.shape))))

    __radd__ = __add__

    def __neg__(self):
        a = self
        return Tensor._make(-a.data, (a,), lambda g: ((a, -g),))

    def __sub__(self, other):
        return self + (-as_tensor(other))

    def __rsub__(self, other):
        return as_tensor(other) + (-self)

    def __mul__(self, other):
        other = as_tensor(other)
        a, b = self, other
        return Tensor._make(
            a.data * b.data, (a, b),
            lambda g: ((a, _unbroadcast(g * b.data, a.data.shape)),
                       (b, _unbroadcast(g * a.data, b.data.shape))))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_tensor(other)
        a, b = self, other
        return Tensor._make(
            a.data / b.data, (a, b),
            lambda g: ((a, _unbroadcast(g / b.data, a.data.shape)),
                       (b, _unbroadcast(-g * a.data / (b.data * b.data), b.data.shape))))

    def __rtruediv__(self, other):
        return as_tensor(other) / self

    def __pow__(self, exponent):
        if not isinstance(exponent, (int, float)):
            raise TypeError("only scalar exponents supported")
        a = self
        return Tensor._make(
            a.data ** exponent, (a,),
            lambda g: ((a, g * exponent * a.data ** (exponent - 1)),))

    def __matmul__(self, other):
        other = as_tensor(other)
        a, b = self, other
        return Tensor._make(
            a.data @ b.data, (a, b),
            lambda g: ((a, g @ b.data.swapaxes(-1, -2)),
                       (b, a.data.swapaxes(-1, -2) @ g)))

    # -- unary math --------------------------------------------------------------

    def exp(self):
        a = self
        out_data = np.exp(a.data)
        return Tensor._make(out_data, (a,), lambda g: ((a, g * out_data),))

    def log(self):
        a = self
        return Tensor._make(np.log(a.data), (a,), lambda g: ((a, g / a.data),))

    def tanh(self):
        a = self
        out_data = np.tanh(a.data)
        return Tensor._make(out_data, (a,), lambda g: ((a, g * (1.0 - out_data * out_data)),))

    def sigmoid(self):
        a = self
        out_data = 1.0 / (1.0 + np.exp(-a.data))
        return Tensor._make(out_data, (a,), lambda g: ((a, g * out_data * (1.0 - out_data)),))

    def relu(self):
        a = self
        mask = a.data > 0
        return Tensor._make(a.data * mask, (a,), lambda g: ((a, g * mask),))

    def square(self):
        return self * self

    def sqrt(self):
        return self ** 0.5

    def abs(self):
        a = self
        sign = np.sign(a.data)
        return Tensor._make(np.abs(a.data), (a,), lambda g: ((a, g * sign),))

    # -- reductions ----------------------------------------------------------------

    def sum(self, axis=None, keepdims=False):
        a = self
        out_data = a.data.sum(axis=axis, keepdims=keepdims)

        def bw(g):
            gg = g
            if axis is not None and not keepdims:
                gg = np.expand_dims(gg, axis)
            return ((a, np.broadcast_to(gg, a.data.shape).copy()),)

        return Tensor._make(out_data, (a,), bw)

    def mean(self, axis=None, keepdims=False):
        n = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    # -- shaping ----------------------------------------------------------------

    def reshape(self, *shape):
        a = self
        in_shape = a.data.shape
        return Tensor._make(a.data.reshape(*shape), (a,),
                            lambda g: ((a, g.reshape(in_shape)),))

    def __getitem__(self, idx):
        a = self

        def bw(g):
            da = np.zeros_like(a.data)
            np.add.at(da, idx, g)
            return ((a, da),)

        return Tensor._make(a.data[idx], (a,), bw)

    # -- gradient plumbing ---------------------------------------------------------

    def clamp(self, lo=None, hi=None):
        a = self
        out_data = np.clip(a.data, lo, hi)
        mask = np.ones_like(a.data)
        if lo is not None:
            mask = mask * (a.data >= lo)
        if hi is not None:
            mask = mask * (a.data <= hi)
        return Tensor._make(out_data, (a,), lambda g: ((a, g * mask),))


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def concat(tensors, axis=0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bw(g):
        parts = np.split(g, splits, axis=axis)
        return tuple((t, p) for t, p in zip(tensors, parts))

    return Tensor._make(data, tuple(tensors), bw)


def minimum(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    take_a = a.data <= b.data
    data = np.where(take_a, a.data, b.data)
    return Tensor._make(
        data, (a, b),
        lambda g: ((a, _unbroadcast(g * take_a, a.data.shape)),
                   (b, _unbroadcast(g * ~take_a, b.data.shape))))


def maximum(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    take_a = a.data >= b.data
    data = np.where(take_a, a.data, b.data)
    return Tensor._make(
        data, (a, b),
        lambda g: ((a, _unbroadcast(g * take_a, a.data.shape)),
                   (b, _unbroadcast(g * ~take_a, b.data.shape))))


def where(cond: np.ndarray, a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    cond = np.asarray(cond, dtype=bool)
    data = np.where(cond, a.data, b.data)
    return Tensor._make(
        data, (a, b),
        lambda g: ((a, _unbroadcast(g * cond, a.data.shape)),
                   (b, _unbroadcast(g * ~cond, b.data.shape))))


def log_softmax(logits: Tensor, axis=-1) -> Tensor:
    # shift by a detached max; the shift has zero gradient contribution
    shift = Tensor(logits.data.max(axis=axis, keepdims=True))
    z = logits - shift
    return z - z.exp().sum(axis=axis, keepdims=True).log()


def softmax(logits: Tensor, axis=-1) -> Tensor:
    return log_softmax(logits, axis=axis).exp()


def straight_through(value: np.ndarray, passthrough: Tensor) -> Tensor:
    """Forward `value`, route the full downstream gradient to `passthrough`.

    The vector-quantization bridge: value is the selected code row(s) and
    passthrough is the encoder output of identical shape.
    """
    value = np.asarray(value, dtype=np.float64)
    if value.shape != passthrough.data.shape:
        raise ValueError(f"shape mismatch {value.shape} vs {passthrough.data.shape}")
    p = passthrough
    return Tensor._make(value.copy(), (p,), lambda g: ((p, g),))
