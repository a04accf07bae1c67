"""Stage-1 training loop: PPO over the imitation environment with the
VQ losses folded into the policy objective."""

from __future__ import annotations

import dataclasses
import io

import numpy as np

from ..motion.dataset import MotionDataset
from ..ppo import PPOConfig, PPOTrainer, RolloutBatch, compute_gae
from ..sim.config import SimConfig
from .env import PmcEnv
from .policy import PmcPolicy


@dataclasses.dataclass
class PmcTrainConfig:
    total_steps: int = 2_000_000
    n_envs: int = 32
    seed: int = 0
    ppo: PPOConfig = dataclasses.field(default_factory=lambda: PPOConfig(
        gamma=0.95, lam=0.95, clip=0.2, lr=1e-5, batch_size=8192))
    alpha1: float = 3.0
    checkpoint_every: int = 25         # learner updates between snapshots
    stop_at_reward: float | None = None
    randomize: bool = True
    # value targets are scaled to O(1): returns * (1 - gamma)
    reward_scale: float | None = None

    def value_scale(self) -> float:
        return self.reward_scale if self.reward_scale is not None \
            else (1.0 - self.ppo.gamma)


class MetricsLog:
    """Append-only CSV: step, mean reward, per-clip returns, perplexity."""

    def __init__(self, clip_ids):
        self.buf = io.StringIO()
        cols = ",".join(f"clip_{cid}" for cid in clip_ids)
        self.buf.write(f"step,mean_reward,{cols},perplexity\n")

    def append(self, step, mean_reward, returns, perplexity):
        vals = ",".join(f"{r:.6f}" for r in returns)
        self.buf.write(f"{step},{mean_reward:.6f},{vals},{perplexity:.3f}\n")

    def text(self) -> str:
        return self.buf.getvalue()


def collect_rollout(env: PmcEnv, policy: PmcPolicy, steps: int,
                    rng: np.random.Generator, gamma: float,
                    reward_scale: float = 1.0):
    """Time-major rollout across the vector env; timeout bootstrapping
    folds gamma * V(terminal) into the reward on clip-end terminations."""
    n = env.n
    obs_p = np.empty((steps, n, env.buffer.proprio().shape[1]))
    obs_f = None
    actions = np.empty((steps, n, 8))
    log_probs = np.empty((steps, n))
    rewards = np.empty((steps, n))
    values = np.empty((steps + 1, n))
    dones = np.empty((steps, n))
    episode_rewards = []
    for t in range(steps):
        obs = env.observe()
        if obs_f is None:
            obs_f = np.empty((steps, n, obs["future"].shape[1]))
        obs_p[t] = obs["proprio"]
        obs_f[t] = obs["future"]
        act, _, lp, val = policy.act(obs["proprio"], obs["future"], rng)
        actions[t] = act
        log_probs[t] = lp
        values[t] = val
        r, done, timeout, infos = env.step(act)
        term_p, term_f, term_env = [], [], []
        for info in infos:
            episode_rewards.append(info["normalized_reward"])
            if "terminal_proprio" in info:
                term_p.append(info["terminal_proprio"])
                term_f.append(info["terminal_future"])
                term_env.append(info["env"])
        r = r * reward_scale
        if term_env:
            _, _, _, v_term = policy.act(np.stack(term_p), np.stack(term_f),
                                         rng, deterministic=True)
            for j, i_env in enumerate(term_env):
                r[i_env] += gamma * v_term[j]
        rewards[t] = r
        dones[t] = done
    final = env.observe()
    _, _, _, v_final = policy.act(final["proprio"], final["future"], rng,
                                  deterministic=True)
    values[steps] = v_final
    adv, ret = compute_gae(rewards, values, gamma=gamma,
                           lam=env_gae_lambda(), dones=dones)
    flat = RolloutBatch(
        obs={"proprio": obs_p.reshape(-1, obs_p.shape[-1]),
             "future": obs_f.reshape(-1, obs_f.shape[-1])},
        actions=actions.reshape(-1, 8),
        log_probs=log_probs.reshape(-1),
        rewards=rewards.reshape(-1),
        values=values[:steps].reshape(-1),
        dones=dones.reshape(-1),
        advantages=adv.reshape(-1),
        returns=ret.reshape(-1))
    return flat, episode_rewards


_GAE_LAMBDA = 0.95


def env_gae_lambda() -> float:
    return _GAE_LAMBDA


def train_pmc(dataset: MotionDataset, cfg: PmcTrainConfig,
              sim_cfg: SimConfig | None = None,
              on_checkpoint=None, log_progress=None):
    """Returns (policy, metrics MetricsLog, history list).

    on_checkpoint(step, policy) fires every cfg.checkpoint_every updates;
    training aborts early (keeping the last healthy policy) if metrics
    turn non-finite, and stops once stop_at_reward is sustained.
    """
    global _GAE_LAMBDA
    _GAE_LAMBDA = cfg.ppo.lam
    rng = np.random.default_rng(cfg.seed)
    policy = PmcPolicy(rng)
    env = PmcEnv(dataset, cfg.n_envs, seed=cfg.seed + 1, cfg=sim_cfg,
                 alpha=cfg.alpha1, randomize=cfg.randomize)
    trainer = PPOTrainer(policy, cfg.ppo)
    steps_per_iter = max(1, cfg.ppo.batch_size // cfg.n_envs)
    metrics = MetricsLog(dataset.ids())
    history = []
    recent = []
    step = 0
    update = 0
    while step < cfg.total_steps:
        policy.codebook.reset_usage()
        batch, ep_rewards = collect_rollout(env, policy, steps_per_iter, rng,
                                            cfg.ppo.gamma, cfg.value_scale())
        step += len(batch)
        update += 1
        trainer.set_progress(step / cfg.total_steps)
        stats = trainer.update(batch, rng)
        recent.extend(ep_rewards)
        recent = recent[-200:]
        mean_r = float(np.mean(recent)) if recent else 0.0
        perplexity = policy.codebook.perplexity()
        metrics.append(step, mean_r, dataset.returns, perplexity)
        history.append({"step": step, "mean_reward": mean_r,
                        "perplexity": perplexity, **stats})
        if log_progress:
            log_progress(history[-1])
        if on_checkpoint and update % cfg.checkpoint_every == 0:
            on_checkpoint(step, policy)
        if stats.get("aborted"):
            break
        if cfg.stop_at_reward is not None and len(recent) >= 50 \
                and mean_r >= cfg.stop_at_reward:
            break
    if on_checkpoint:
        on_checkpoint(step, policy)
    return policy, metrics, history


def evaluate_tracking(policy: PmcPolicy, dataset: MotionDataset,
                      episodes_per_clip: int = 2, seed: int = 0,
                      sim_cfg: SimConfig | None = None) -> dict:
    """Deterministic rollouts from the clip start; returns per-clip
    normalized rewards."""
    rng = np.random.default_rng(seed)
    results = {}
    for idx in range(len(dataset)):
        clip = dataset[idx]
        scores = []
        for _ in range(episodes_per_clip):
            env = PmcEnv(dataset, 1, seed=int(rng.integers(2 ** 31)),
                         cfg=sim_cfg, randomize=False)
            env.reset_env(0, clip_index=idx)
            done = False
            while not done:
                obs = env.observe()
                act, _, _, _ = policy.act(obs["proprio"], obs["future"], rng,
                                          deterministic=True)
                _, dones, _, infos = env.step(act)
                if dones[0]:
                    scores.append(infos[0]["normalized_reward"])
                    done = True
        results[clip.id] = float(np.mean(scores))
    return results
