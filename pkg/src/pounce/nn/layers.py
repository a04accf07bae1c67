"""Network layers used by the three controller levels.

Shapes follow numpy conventions: dense inputs are (batch, features),
conv1d inputs (batch, channels, length), conv2d inputs
(batch, channels, height, width). All parameters are float64 Tensors.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, concat

ACTIVATIONS = {
    "tanh": lambda t: t.tanh(),
    "relu": lambda t: t.relu(),
    "sigmoid": lambda t: t.sigmoid(),
    "linear": lambda t: t,
}


def orthogonal(rng: np.random.Generator, shape, gain: float = 1.0) -> np.ndarray:
    """Orthogonal init on the (rows, fan_in) flattening of `shape`."""
    rows = shape[0]
    cols = int(np.prod(shape[1:]))
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return np.ascontiguousarray(gain * q[:rows, :cols]).reshape(shape)


class Module:
    """Minimal parameter container with named float64 parameters."""

    def named_parameters(self):
        """Yield (name, Tensor) pairs, recursing into child modules."""
        for key, val in vars(self).items():
            if isinstance(val, Tensor) and val.requires_grad:
                yield key, val
            elif isinstance(val, Module):
                for sub, p in val.named_parameters():
                    yield f"{key}/{sub}", p
            elif isinstance(val, (list, tuple)):
                for i, item in enumerate(val):
                    if isinstance(item, Module):
                        for sub, p in item.named_parameters():
                            yield f"{key}.{i}/{sub}", p

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def state_arrays(self) -> dict:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_arrays(self, arrays: dict):
        mine = dict(self.named_parameters())
        missing = set(mine) - set(arrays)
        if missing:
            raise KeyError(f"missing parameter blocks: {sorted(missing)}")
        for name, p in mine.items():
            src = np.asarray(arrays[name], dtype=np.float64)
            if src.shape != p.data.shape:
                raise ValueError(f"shape mismatch for {name}: {src.shape} vs {p.data.shape}")
            p.data = src.copy()


class Linear(Module):
    def __init__(self, rng, n_in: int, n_out: int, gain: float = 1.0):
        self.W = Tensor(orthogonal(rng, (n_out, n_in), gain).T.copy(), requires_grad=True)
        self.b = Tensor(np.zeros(n_out), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.W + self.b


class MLP(Module):
    """Stack of Linear layers with a fixed hidden activation."""

    def __init__(self, rng, n_in: int, hidden: list, n_out: int,
                 activation: str = "tanh", out_gain: float = 0.01,
                 out_activation: str = "linear"):
        self.layers = []
        last = n_in
        for width in hidden:
            self.layers.append(Linear(rng, last, width, gain=np.sqrt(2.0) if activation == "relu" else 1.0))
            last = width
        self.layers.append(Linear(rng, last, n_out, gain=out_gain))
        self.act = activation
        self.out_act = out_activation

    def __call__(self, x: Tensor) -> Tensor:
        act = ACTIVATIONS[self.act]
        for layer in self.layers[:-1]:
            x = act(layer(x))
        return ACTIVATIONS[self.out_act](self.layers[-1](x))


def circular_pad1d(x: Tensor, pad: int) -> Tensor:
    """Append the first `pad` ring samples at the end (wrap-around)."""
    if pad == 0:
        return x
    return concat([x, x[:, :, :pad]], axis=2)


class Conv1d(Module):
    """1D convolution, valid padding; `cyclic=True` wraps the ring input."""

    def __init__(self, rng, c_in: int, c_out: int, kernel: int,
                 stride: int = 1, cyclic: bool = False):
        self.W = Tensor(orthogonal(rng, (c_out, c_in * kernel)).reshape(c_out, c_in, kernel),
                        requires_grad=True)
        self.b = Tensor(np.zeros(c_out), requires_grad=True)
        self.kernel = kernel
        self.stride = stride
        self.cyclic = cyclic

    def __call__(self, x: Tensor) -> Tensor:
        if self.cyclic:
            x = circular_pad1d(x, self.kernel - 1)
        return _conv1d(x, self.W, self.b, self.stride)


def _conv1d(x: Tensor, W: Tensor, b: Tensor, stride: int) -> Tensor:
    B, C, L = x.data.shape
    O, _, K = W.data.shape
    Lo = (L - K) // stride + 1
    windows = np.lib.stride_tricks.sliding_window_view(x.data, K, axis=2)[:, :, ::stride]
    out = np.einsum("bclk,ock->bol", windows, W.data, optimize=True)
    out += b.data[None, :, None]

    def bw(g):
        dW = np.einsum("bol,bclk->ock", g, windows, optimize=True)
        dx = np.zeros_like(x.data)
        for k in range(K):
            dx[:, :, k:k + stride * Lo:stride] += np.einsum(
                "bol,oc->bcl", g, W.data[:, :, k])
        db = g.sum(axis=(0, 2))
        return ((x, dx), (W, dW), (b, db))

    return Tensor._make(out, (x, W, b), bw)


class Conv2d(Module):
    """2D convolution, valid padding, stride 1."""

    def __init__(self, rng, c_in: int, c_out: int, kernel: int):
        self.W = Tensor(orthogonal(rng, (c_out, c_in * kernel * kernel))
                        .reshape(c_out, c_in, kernel, kernel), requires_grad=True)
        self.b = Tensor(np.zeros(c_out), requires_grad=True)
        self.kernel = kernel

    def __call__(self, x: Tensor) -> Tensor:
        return _conv2d(x, self.W, self.b)


def _conv2d(x: Tensor, W: Tensor, b: Tensor) -> Tensor:
    B, C, H, Wd = x.data.shape
    O, _, Kh, Kw = W.data.shape
    Ho, Wo = H - Kh + 1, Wd - Kw + 1
    windows = np.lib.stride_tricks.sliding_window_view(x.data, (Kh, Kw), axis=(2, 3))
    out = np.einsum("bchwij,ocij->bohw", windows, W.data, optimize=True)
    out += b.data[None, :, None, None]

    def bw(g):
        dW = np.einsum("bohw,bchwij->ocij", g, windows, optimize=True)
        dx = np.zeros_like(x.data)
        for ki in range(Kh):
            for kj in range(Kw):
                dx[:, :, ki:ki + Ho, kj:kj + Wo] += np.einsum(
                    "bohw,oc->bchw", g, W.data[:, :, ki, kj])
        db = g.sum(axis=(0, 2, 3))
        return ((x, dx), (W, dW), (b, db))

    return Tensor._make(out, (x, W, b), bw)


class LSTMCell(Module):
    """Single-step LSTM; state is threaded explicitly as (h, c) arrays."""

    def __init__(self, rng, n_in: int, n_hidden: int):
        self.Wx = Tensor(orthogonal(rng, (4 * n_hidden, n_in)).T.copy(), requires_grad=True)
        self.Wh = Tensor(orthogonal(rng, (4 * n_hidden, n_hidden)).T.copy(), requires_grad=True)
        bias = np.zeros(4 * n_hidden)
        bias[n_hidden:2 * n_hidden] = 1.0  # forget-gate bias
        self.b = Tensor(bias, requires_grad=True)
        self.n_hidden = n_hidden

    def __call__(self, x: Tensor, h: Tensor, c: Tensor):
        n = self.n_hidden
        gates = x @ self.Wx + h @ self.Wh + self.b
        i = gates[:, 0 * n:1 * n].sigmoid()
        f = gates[:, 1 * n:2 * n].sigmoid()
        g = gates[:, 2 * n:3 * n].tanh()
        o = gates[:, 3 * n:4 * n].sigmoid()
        c_new = f * c + i * g
        h_new = o * c_new.tanh()
        return h_new, c_new

    def initial_state(self, batch: int):
        return (np.zeros((batch, self.n_hidden)), np.zeros((batch, self.n_hidden)))
