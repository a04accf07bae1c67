"""Adversarial imitation on flat terrain: a discriminator over
(proprioception, action) pairs separating stage-1 rollouts from the
current stage-2 policy; its confusion becomes the imitation reward."""

from __future__ import annotations

import numpy as np

from ..nn import Adam, MLP, Tensor, no_grad
from ..pmc.obs import PROPRIO_DIM
from ..sim.config import N_JOINTS

GAIL_REWARD_CAP = 10.0
_EPS = 1e-8


class Discriminator:
    """MLP classifier with sigmoid output strictly inside (0, 1)."""

    def __init__(self, rng: np.random.Generator, lr: float = 1e-4):
        self.net = MLP(rng, PROPRIO_DIM + N_JOINTS, [256, 256], 1, out_gain=0.01)
        self.opt = Adam(dict(self.named_parameters()), lr=lr)

    def named_parameters(self):
        for n, p in self.net.named_parameters():
            yield f"gail/{n}", p

    def logits(self, proprio: np.ndarray, actions: np.ndarray) -> Tensor:
        return self.net(Tensor(np.concatenate([proprio, actions], axis=1))).reshape(-1)

    def probability(self, proprio: np.ndarray, actions: np.ndarray) -> np.ndarray:
        with no_grad():
            return 1.0 / (1.0 + np.exp(-self.logits(proprio, actions).data))


def gail_update(disc: Discriminator, expert_batch: tuple, policy_batch: tuple) -> float:
    """One discriminator step minimizing
    -E_expert[log D] - E_policy[log(1 - D)]; returns the loss."""
    (pe, ae), (pp, ap) = expert_batch, policy_batch
    if len(pe) == 0 or len(pp) == 0:
        raise ValueError("both GAIL batches must be non-empty")
    d_expert = disc.logits(pe, ae).sigmoid()
    d_policy = disc.logits(pp, ap).sigmoid()
    loss = -(d_expert.clamp(_EPS, 1 - _EPS).log().mean()
             + (1.0 - d_policy).clamp(_EPS, 1 - _EPS).log().mean())
    disc.opt.zero_grad()
    loss.backward()
    disc.opt.step(max_grad_norm=1.0)
    return float(loss.data)


def gail_reward(d_value) -> np.ndarray:
    """-log(1 - D), clamped to [0, 10]."""
    d = np.clip(np.asarray(d_value, dtype=np.float64), 0.0, 1.0 - 1e-12)
    return np.minimum(-np.log1p(-d), GAIL_REWARD_CAP)


def collect_expert_pairs(pmc_policy, dataset, n_pairs: int = 20000,
                         seed: int = 0, sim_cfg=None) -> tuple:
    """Deterministic stage-1 rollouts over the dataset; returns
    (proprio (N, 90), actions (N, 8)) for the discriminator's real side."""
    from ..pmc.env import PmcEnv
    rng = np.random.default_rng(seed)
    env = PmcEnv(dataset, 8, seed=seed, cfg=sim_cfg, randomize=False)
    proprio_rows, action_rows = [], []
    while len(proprio_rows) * 8 < n_pairs:
        obs = env.observe()
        act, _, _, _ = pmc_policy.act(obs["proprio"], obs["future"], rng,
                                      deterministic=True)
        proprio_rows.append(obs["proprio"].copy())
        action_rows.append(act.copy())
        env.step(act)
    proprio = np.concatenate(proprio_rows)[:n_pairs]
    actions = np.concatenate(action_rows)[:n_pairs]
    return proprio, actions
