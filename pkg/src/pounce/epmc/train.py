"""Stage-2 training: PPO over a scenario environment with the frozen
primitive decoder, plus the GAIL discriminator interleaved 1:1 with
policy updates on flat terrain."""

from __future__ import annotations

import dataclasses

import numpy as np

from ..motion.dataset import MotionDataset
from ..pmc.policy import PmcPolicy
from ..ppo import PPOConfig, PPOTrainer, RolloutBatch, compute_gae
from ..sim.config import N_JOINTS, SimConfig
from .env import EpmcEnv, SPARSE_SCENARIOS
from .gail import Discriminator, collect_expert_pairs, gail_reward, gail_update
from .policy import EpmcPolicy


@dataclasses.dataclass
class EpmcTrainConfig:
    scenario: str = "flat"
    total_steps: int = 2_000_000
    n_envs: int = 32
    seed: int = 0
    ppo: PPOConfig = dataclasses.field(default_factory=lambda: PPOConfig(
        gamma=0.95, lam=0.95, clip=0.1, lr=5e-5, batch_size=16384))
    gail_weight: float = 1.0
    from_scratch: bool = False
    horizon: float | None = None
    reward_scale: float | None = None
    stop_at_metric: float | None = None
    warmstart_steps: int = 0

    def value_scale(self) -> float:
        return self.reward_scale if self.reward_scale is not None \
            else (1.0 - self.ppo.gamma)


OBS_KEYS = ("proprio", "command", "height_grid", "depth_grid", "rays", "h", "c")


def build_policy(rng: np.random.Generator, pmc_arrays: dict | None,
                 scenario: str, from_scratch: bool = False) -> EpmcPolicy:
    pmc = PmcPolicy(rng)
    if pmc_arrays is not None and not from_scratch:
        pmc.load_arrays(pmc_arrays)
    residual = scenario in ("stairs", "uniform")
    return EpmcPolicy(rng, pmc, residual_head=residual)


def train_epmc(cfg: EpmcTrainConfig, pmc_arrays: dict | None,
               dataset: MotionDataset | None = None,
               sim_cfg: SimConfig | None = None,
               log_progress=None, on_checkpoint=None):
    """Returns (policy, history). dataset is needed only for the GAIL
    expert buffer on flat terrain."""
    rng = np.random.default_rng(cfg.seed)
    policy = build_policy(rng, pmc_arrays, cfg.scenario, cfg.from_scratch)
    warm_used = 0
    if cfg.warmstart_steps > 0:
        from .warmstart import warmstart
        warm_used = warmstart(policy, steps=cfg.warmstart_steps,
                              n_envs=cfg.n_envs, seed=cfg.seed + 17,
                              sim_cfg=sim_cfg, log_progress=log_progress)
    env = EpmcEnv(cfg.scenario, cfg.n_envs, seed=cfg.seed + 1, cfg=sim_cfg,
                  horizon=cfg.horizon)
    trainer = PPOTrainer(policy, cfg.ppo)
    use_gail = cfg.scenario == "flat" and cfg.gail_weight > 0.0
    disc = None
    expert = None
    if use_gail:
        if dataset is None:
            raise ValueError("flat-terrain GAIL needs the stage-1 dataset")
        disc = Discriminator(np.random.default_rng(cfg.seed + 2), lr=3e-4)
        pmc_for_expert = PmcPolicy(np.random.default_rng(0))
        if pmc_arrays is not None:
            pmc_for_expert.load_arrays(pmc_arrays)
        expert = collect_expert_pairs(pmc_for_expert, dataset, n_pairs=16384,
                                      seed=cfg.seed + 3, sim_cfg=sim_cfg)
    steps_per_iter = max(1, cfg.ppo.batch_size // cfg.n_envs)
    history = []
    recent = []
    successes = []
    step = warm_used           # warm start counts against the budget
    scale = cfg.value_scale()
    h, c = policy.initial_state(cfg.n_envs)
    while step < cfg.total_steps:
        T, n = steps_per_iter, cfg.n_envs
        buf = {k: None for k in OBS_KEYS}
        actions = np.empty((T, n, 1 + N_JOINTS))
        log_probs = np.empty((T, n))
        rewards = np.empty((T, n))
        values = np.empty((T + 1, n))
        dones = np.empty((T, n))
        gail_pairs = []
        for t in range(T):
            obs = env.observe()
            obs["h"], obs["c"] = h, c
            for k in OBS_KEYS:
                if buf[k] is None:
                    buf[k] = np.empty((T,) + np.asarray(obs[k]).shape)
                buf[k][t] = obs[k]
            idx, residual, lp, val, motor, (h, c) = policy.act(obs, h, c, rng)
            r, done, timeout, infos = env.step(motor)
            if use_gail:
                d = disc.probability(obs["proprio"], motor)
                r = r + cfg.gail_weight * gail_reward(d)
                gail_pairs.append((obs["proprio"].copy(), motor.copy()))
            for info in infos:
                recent.append(info["mean_command_reward"])
                successes.append(1.0 if info["success"] else 0.0)
                i = info["env"]
                h[i] = 0.0
                c[i] = 0.0
            actions[t, :, 0] = idx
            actions[t, :, 1:] = residual
            log_probs[t] = lp
            rewards[t] = r * scale
            values[t] = val
            dones[t] = done
        final_obs = env.observe()
        final_obs["h"], final_obs["c"] = h, c
        _, _, _, v_fin, _, _ = policy.act(final_obs, h, c, rng, deterministic=True)
        values[T] = v_fin
        adv, ret = compute_gae(rewards, values, gamma=cfg.ppo.gamma,
                               lam=cfg.ppo.lam, dones=dones)
        batch = RolloutBatch(
            obs={k: v.reshape((-1,) + v.shape[2:]) for k, v in buf.items()},
            actions=actions.reshape(-1, 1 + N_JOINTS),
            log_probs=log_probs.reshape(-1), rewards=rewards.reshape(-1),
            values=values[:T].reshape(-1), dones=dones.reshape(-1),
            advantages=adv.reshape(-1), returns=ret.reshape(-1))
        trainer.set_progress(step / cfg.total_steps)
        stats = trainer.update(batch, rng)
        if use_gail and gail_pairs:
            pp = np.concatenate([p for p, _ in gail_pairs])
            pa = np.concatenate([a for _, a in gail_pairs])
            losses = []
            for _ in range(8):
                sel_p = rng.choice(len(pp), size=min(512, len(pp)), replace=False)
                sel_e = rng.choice(len(expert[0]), size=min(512, len(expert[0])),
                                   replace=False)
                losses.append(gail_update(
                    disc, (expert[0][sel_e], expert[1][sel_e]),
                    (pp[sel_p], pa[sel_p])))
            stats["gail_loss"] = float(np.mean(losses))
        step += len(batch)
        recent = recent[-100:]
        successes = successes[-100:]
        metric = float(np.mean(recent)) if recent else 0.0
        history.append({"step": step, "command_reward": metric,
                        "success_rate": float(np.mean(successes)) if successes else 0.0,
                        **stats})
        if log_progress:
            log_progress(history[-1])
        if on_checkpoint:
            on_checkpoint(step, policy)
        if stats.get("aborted"):
            break
        if cfg.stop_at_metric is not None and len(recent) >= 50:
            key = metric if cfg.scenario not in SPARSE_SCENARIOS \
                else history[-1]["success_rate"]
            if key >= cfg.stop_at_metric:
                break
    return policy, history


def evaluate_epmc(policy: EpmcPolicy, scenario: str, episodes: int = 100,
                  seed: int = 0, sim_cfg: SimConfig | None = None,
                  n_envs: int = 16, horizon: float | None = None,
                  hold_command: bool = False) -> dict:
    """Deterministic-opponent evaluation: mean command reward, success
    rate, and mean torque magnitude over `episodes` finished episodes."""
    rng = np.random.default_rng(seed)
    env = EpmcEnv(scenario, n_envs, seed=seed, cfg=sim_cfg, randomize=False,
                  horizon=horizon, hold_command=hold_command)
    h, c = policy.initial_state(n_envs)
    finished = []
    torque_acc = 0.0
    torque_n = 0
    while len(finished) < episodes:
        obs = env.observe()
        obs["h"], obs["c"] = h, c
        idx, residual, _, _, motor, (h, c) = policy.act(obs, h, c, rng,
                                                        deterministic=False)
        _, done, _, infos = env.step(motor)
        torque_acc += float(np.abs(env.bs.torques).sum())
        torque_n += env.bs.torques.size
        for info in infos:
            finished.append(info)
            i = info["env"]
            h[i] = 0.0
            c[i] = 0.0
    finished = finished[:episodes]
    return {
        "episodes": len(finished),
        "command_reward": float(np.mean([f["mean_command_reward"] for f in finished])),
        "success_rate": float(np.mean([f["success"] for f in finished])),
        "mean_abs_torque": torque_acc / max(torque_n, 1),
    }
