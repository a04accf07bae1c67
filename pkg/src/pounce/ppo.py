"""Clipped-surrogate PPO with generalized advantage estimation.

Shared across the three training stages. Rollouts are stored as
time-major (T, n_envs, ...) arrays so GAE can run vectorized across
environments; batches are flattened before minibatch updates.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .nn import Adam, Tensor, minimum


@dataclasses.dataclass
class PPOConfig:
    gamma: float = 0.95
    lam: float = 0.95
    clip: float = 0.2
    lr: float = 1e-5
    lr_final: float | None = None     # linear anneal target; None = constant
    batch_size: int = 8192
    epochs: int = 4
    minibatches: int = 8
    value_coef: float = 0.5
    entropy_coef: float = 0.0
    max_grad_norm: float | None = 0.5
    normalize_advantages: bool = True

    def lr_at(self, progress: float) -> float:
        """progress in [0, 1] through the training budget."""
        if self.lr_final is None:
            return self.lr
        p = min(max(progress, 0.0), 1.0)
        return self.lr + (self.lr_final - self.lr) * p


@dataclasses.dataclass
class RolloutBatch:
    """Flat rollout storage; obs is a dict of arrays keyed by input name."""
    obs: dict
    actions: np.ndarray
    log_probs: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    dones: np.ndarray
    advantages: np.ndarray | None = None
    returns: np.ndarray | None = None

    def __len__(self):
        return self.rewards.shape[0]


def compute_gae(rewards: np.ndarray, values: np.ndarray,
                gamma: float = 0.95, lam: float = 0.95,
                dones: np.ndarray | None = None):
    """GAE(lambda) advantages and returns.

    values must have one more entry than rewards along time (bootstrap of
    the state after the last step; callers pass 0 there on true episode
    ends). dones[t] marks that step t terminated its episode, cutting the
    accumulation. Accepts (T,) or (T, n_envs) arrays.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    T = rewards.shape[0]
    if values.shape[0] != T + 1:
        raise ValueError(f"values must have length T+1, got {values.shape[0]} for T={T}")
    if dones is None:
        dones = np.zeros_like(rewards)
    else:
        dones = np.asarray(dones, dtype=np.float64)
        if dones.shape != rewards.shape:
            raise ValueError("dones shape must match rewards")
    advantages = np.zeros_like(rewards)
    carry = np.zeros_like(rewards[0] if rewards.ndim > 1 else np.float64(0.0))
    for t in range(T - 1, -1, -1):
        live = 1.0 - dones[t]
        delta = rewards[t] + gamma * values[t + 1] * live - values[t]
        carry = delta + gamma * lam * live * carry
        advantages[t] = carry
    returns = advantages + values[:T]
    return advantages, returns


def gae_reference(rewards, values, gamma, lam, dones=None):
    """O(T^2) oracle: direct truncated sums of discounted TD residuals."""
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    T = rewards.shape[0]
    if dones is None:
        dones = np.zeros(T)
    adv = np.zeros(T)
    for t in range(T):
        acc = 0.0
        for l in range(T - t):
            k = t + l
            live = 1.0 - dones[k]
            delta = rewards[k] + gamma * values[k + 1] * live - values[k]
            acc += (gamma * lam) ** l * delta
            if dones[k]:
                break
        adv[t] = acc
    return adv, adv + values[:T]


def ppo_loss(log_prob_new: Tensor, log_prob_old: np.ndarray,
             advantages: np.ndarray, clip: float,
             values_new: Tensor | None = None,
             returns: np.ndarray | None = None,
             entropy: Tensor | None = None,
             value_coef: float = 0.5, entropy_coef: float = 0.0):
    """Clipped surrogate + value loss + entropy bonus; returns (loss, stats)."""
    adv = Tensor(np.asarray(advantages, dtype=np.float64))
    ratio = (log_prob_new - Tensor(log_prob_old)).exp()
    clipped = ratio.clamp(1.0 - clip, 1.0 + clip)
    surrogate = -minimum(ratio * adv, clipped * adv).mean()
    loss = surrogate
    stats = {"policy_loss": float(surrogate.data)}
    if values_new is not None:
        v_loss = (values_new - Tensor(returns)).square().mean()
        loss = loss + value_coef * v_loss
        stats["value_loss"] = float(v_loss.data)
    if entropy is not None:
        ent = entropy.mean()
        stats["entropy"] = float(ent.data)
        if entropy_coef != 0.0:
            loss = loss - entropy_coef * ent
    stats["clip_fraction"] = float(np.mean(np.abs(ratio.data - 1.0) > clip))
    return loss, stats


class PPOTrainer:
    """Runs minibatch epochs over a rollout batch for one policy.

    The policy object must expose:
      named_parameters() -> iterable of (name, Tensor)
      frozen_prefixes    -> iterable of block-name prefixes excluded from updates
      evaluate(obs_slice, actions) -> (log_probs, values, entropy, aux_loss)
    where obs_slice is the obs dict indexed down to a minibatch.
    """

    def __init__(self, policy, cfg: PPOConfig):
        self.policy = policy
        self.cfg = cfg
        frozen = tuple(getattr(policy, "frozen_prefixes", ()))
        self.trainable = {name: p for name, p in policy.named_parameters()
                          if not any(name.startswith(f) for f in frozen)}
        self.frozen = {name: p for name, p in policy.named_parameters()
                       if any(name.startswith(f) for f in frozen)}
        self.opt = Adam(self.trainable, lr=cfg.lr)

    def set_progress(self, progress: float):
        self.opt.lr = self.cfg.lr_at(progress)

    def update(self, batch: RolloutBatch, rng: np.random.Generator) -> dict:
        cfg = self.cfg
        n = len(batch)
        adv = batch.advantages.copy()
        if cfg.normalize_advantages and adv.std() > 1e-8:
            adv = (adv - adv.mean()) / (adv.std() + 1e-8)
        snapshot = {k: p.data.copy() for k, p in self.trainable.items()}
        frozen_before = {k: p.data.copy() for k, p in self.frozen.items()}
        mb_size = max(1, n // cfg.minibatches)
        agg = {"policy_loss": 0.0, "value_loss": 0.0, "clip_fraction": 0.0,
               "entropy": 0.0, "aux_loss": 0.0}
        count = 0
        for _ in range(cfg.epochs):
            order = rng.permutation(n)
            for start in range(0, n - mb_size + 1, mb_size):
                sel = order[start:start + mb_size]
                obs_mb = {k: v[sel] for k, v in batch.obs.items()}
                lp, values, entropy, aux = self.policy.evaluate(obs_mb, batch.actions[sel])
                loss, stats = ppo_loss(
                    lp, batch.log_probs[sel], adv[sel], cfg.clip,
                    values_new=values, returns=batch.returns[sel],
                    entropy=entropy, value_coef=cfg.value_coef,
                    entropy_coef=cfg.entropy_coef)
                if aux is not None:
                    loss = loss + aux
                    stats["aux_loss"] = float(aux.data)
                if not np.isfinite(loss.data):
                    for k, p in self.trainable.items():
                        p.data = snapshot[k]
                    return {"aborted": 1.0, **agg}
                self.opt.zero_grad()
                loss.backward()
                self.opt.step(max_grad_norm=cfg.max_grad_norm)
                for key in agg:
                    agg[key] += stats.get(key, 0.0)
                count += 1
        for k, p in self.frozen.items():
            if not np.array_equal(p.data, frozen_before[k]):
                raise RuntimeError(f"frozen parameter block {k} changed during update")
        for key in agg:
            agg[key] /= max(count, 1)
        agg["aborted"] = 0.0
        return agg
