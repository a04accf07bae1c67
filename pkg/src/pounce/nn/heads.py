"""Stochastic policy heads: diagonal Gaussian and categorical."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, log_softmax

LOG_2PI = float(np.log(2.0 * np.pi))


class GaussianHead:
    """Diagonal Gaussian over actions; mean comes from the network,
    log_std is a trainable parameter owned by the policy."""

    def __init__(self, mean: Tensor, log_std: Tensor):
        if not np.all(np.isfinite(mean.data)) or not np.all(np.isfinite(log_std.data)):
            raise ValueError("non-finite Gaussian parameters")
        self.mean = mean
        self.log_std = log_std

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        std = np.exp(self.log_std.data)
        return self.mean.data + std * rng.standard_normal(self.mean.data.shape)

    def mode(self) -> np.ndarray:
        return self.mean.data.copy()

    def log_prob(self, actions: np.ndarray) -> Tensor:
        """Batched log density, summed over action dims; returns (batch,)."""
        actions = np.asarray(actions, dtype=np.float64)
        z = (Tensor(actions) - self.mean) * (-self.log_std).exp()
        per_dim = -0.5 * z.square() - self.log_std - Tensor(0.5 * LOG_2PI)
        return per_dim.sum(axis=-1)

    def entropy(self) -> Tensor:
        per_dim = self.log_std + Tensor(0.5 * (LOG_2PI + 1.0))
        ent = per_dim.sum(axis=-1)
        # broadcast the parameter-only entropy over the batch
        batch = self.mean.data.shape[0]
        return ent * Tensor(np.ones(batch)) if ent.data.ndim == 0 else ent


class CategoricalHead:
    """Categorical distribution over discrete codes from raw logits (batch, K)."""

    def __init__(self, logits: Tensor):
        if not np.all(np.isfinite(logits.data)):
            raise ValueError("non-finite logits")
        self.logits = logits
        self.log_probs = log_softmax(logits, axis=-1)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        p = np.exp(self.log_probs.data)
        p = p / p.sum(axis=-1, keepdims=True)
        cdf = np.cumsum(p, axis=-1)
        u = rng.random((p.shape[0], 1))
        return (u > cdf[:, :-1]).sum(axis=-1).astype(np.int64) if p.shape[-1] > 1 \
            else np.zeros(p.shape[0], dtype=np.int64)

    def mode(self) -> np.ndarray:
        return np.argmax(self.logits.data, axis=-1)

    def log_prob(self, indices: np.ndarray) -> Tensor:
        indices = np.asarray(indices, dtype=np.int64)
        batch = np.arange(indices.shape[0])
        return self.log_probs[batch, indices]

    def entropy(self) -> Tensor:
        p = self.log_probs.exp()
        return -(p * self.log_probs).sum(axis=-1)
