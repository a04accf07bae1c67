"""Vector-quantization bottleneck: codebook, nearest-neighbor lookup,
straight-through gradient bridge, and the two VQ training losses."""

from __future__ import annotations

import numpy as np

from .nn import Tensor
from .nn.tensor import straight_through as _st

DEFAULT_CODES = 256
DEFAULT_DIM = 32
DEFAULT_BETA = 0.25


class Codebook:
    """K discrete code embeddings of dimension D with usage counters."""

    def __init__(self, rng: np.random.Generator, n_codes: int = DEFAULT_CODES,
                 dim: int = DEFAULT_DIM, init_scale: float = 0.1):
        self.embeddings = Tensor(
            rng.uniform(-init_scale, init_scale, size=(n_codes, dim)),
            requires_grad=True)
        self.usage = np.zeros(n_codes, dtype=np.int64)

    @property
    def n_codes(self) -> int:
        return self.embeddings.data.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.data.shape[1]

    def named_parameters(self):
        yield "embeddings", self.embeddings

    def reset_usage(self):
        self.usage[:] = 0

    def perplexity(self) -> float:
        """exp of the entropy of the empirical code-usage distribution."""
        total = self.usage.sum()
        if total == 0:
            return 0.0
        p = self.usage / total
        nz = p[p > 0]
        return float(np.exp(-(nz * np.log(nz)).sum()))


def quantize(z_e: np.ndarray, codebook: Codebook, count_usage: bool = True):
    """Nearest code by Euclidean distance; ties resolve to the lowest index.

    Accepts a single D-vector or a (batch, D) array; returns (indices, z_q)
    with matching leading shape.
    """
    z = np.asarray(z_e, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite encoder output")
    single = z.ndim == 1
    zb = z[None, :] if single else z
    e = codebook.embeddings.data
    # squared distances (batch, K); argmin picks the first (lowest) index on ties
    d2 = (zb * zb).sum(axis=1)[:, None] - 2.0 * zb @ e.T + (e * e).sum(axis=1)[None, :]
    idx = np.argmin(d2, axis=1)
    z_q = e[idx]
    if count_usage:
        np.add.at(codebook.usage, idx, 1)
    if single:
        return int(idx[0]), z_q[0]
    return idx, z_q


def vq_losses(z_e: Tensor, codebook: Codebook, indices: np.ndarray,
              beta: float = DEFAULT_BETA):
    """Codebook and commitment losses for already-selected code indices.

    codebook_loss = ||sg[z_e] - e||^2 moves only the codes;
    commitment_loss = beta * ||z_e - sg[e]||^2 moves only the encoder.
    Both are summed over the code dimension and averaged over the batch.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    idx = np.atleast_1d(np.asarray(indices, dtype=np.int64))
    ze = z_e if z_e.data.ndim == 2 else z_e.reshape(1, -1)
    selected = codebook.embeddings[idx, :]
    diff_cb = Tensor(ze.data) - selected            # gradient flows to codes only
    diff_commit = ze - Tensor(selected.data)        # gradient flows to encoder only
    codebook_loss = diff_cb.square().sum(axis=-1).mean()
    commitment_loss = beta * diff_commit.square().sum(axis=-1).mean()
    return codebook_loss, commitment_loss


def straight_through(z_e: Tensor, z_q: np.ndarray) -> Tensor:
    """Decoder input: value of z_q, gradient passed through to z_e unchanged."""
    return _st(z_q, z_e)
