"""Vectorized imitation environment: episode seeding from reference
frames, prioritized clip selection, tracking rewards, and the three
early-termination causes."""

from __future__ import annotations

import numpy as np

from ..motion.dataset import MotionDataset
from ..motion.planar import frame_at
from ..sim.config import N_JOINTS, SimConfig
from ..sim.engine import BatchState, fallen_mask, policy_step
from ..sim.randomize import (evaluation_randomization, sample_randomization)
from ..sim.terrain import flat_terrain
from .obs import ProprioBuffer, future_targets, per_step_state
from .reward import tracking_reward_terms

MIN_REMAINING = 0.5          # seconds of reference left at episode start
DEVIATION_POSITION = 0.5     # meters
DEVIATION_ORIENTATION = 1.0  # radians

CONTINUE, END_OF_CLIP, FALL, DEVIATION = "continue", "end_of_clip", "fall", "deviation"


def clip_probabilities(returns: np.ndarray, alpha: float = 3.0) -> np.ndarray:
    """p_i proportional to (1 - R_i)^alpha; uniform when all returns are 1."""
    r = np.clip(np.asarray(returns, dtype=np.float64), 0.0, 1.0)
    f = (1.0 - r) ** alpha
    total = f.sum()
    if total <= 0.0:
        return np.full(len(r), 1.0 / len(r))
    return f / total


def prioritized_sample(dataset: MotionDataset, rng: np.random.Generator,
                       alpha: float = 3.0) -> int:
    return int(rng.choice(len(dataset), p=clip_probabilities(dataset.returns, alpha)))


def eligible_start_frames(clip) -> int:
    """Number of start frames leaving at least MIN_REMAINING of reference."""
    return max(1, clip.n_frames - int(round(MIN_REMAINING * clip.rate_hz)))


def init_episode(clip, rng: np.random.Generator):
    """Reference-state initialization at a uniformly random start frame."""
    start = int(rng.integers(eligible_start_frames(clip)))
    return clip.frame(start), start / clip.rate_hz


def should_terminate(state, ref, t: float, clip) -> str:
    from ..sim.engine import is_fallen
    if t >= clip.duration - 1e-9:
        return END_OF_CLIP
    if is_fallen(state):
        return FALL
    dp = np.hypot(state.x - ref.x, state.z - ref.z)
    if dp > DEVIATION_POSITION or abs(state.pitch - ref.pitch) > DEVIATION_ORIENTATION:
        return DEVIATION
    return CONTINUE


class PmcEnv:
    """N parallel imitation episodes over one dataset."""

    def __init__(self, dataset: MotionDataset, n_envs: int, seed: int = 0,
                 cfg: SimConfig | None = None, alpha: float = 3.0,
                 randomize: bool = True):
        self.dataset = dataset
        self.cfg = cfg or SimConfig()
        self.rng = np.random.default_rng(seed)
        self.alpha = alpha
        self.randomize = randomize
        self.n = n_envs
        self.bs = BatchState(n_envs, self.cfg)
        self.terrain = flat_terrain()
        self.terrains = [self.terrain] * n_envs
        self.rands = [evaluation_randomization()] * n_envs
        self.clip_idx = np.zeros(n_envs, dtype=np.int64)
        self.t = np.zeros(n_envs)
        self.episode_reward = np.zeros(n_envs)
        self.episode_steps = np.zeros(n_envs, dtype=np.int64)
        self.buffer = ProprioBuffer(n_envs)
        for i in range(n_envs):
            self.reset_env(i)

    def reset_env(self, i: int, clip_index: int | None = None):
        idx = prioritized_sample(self.dataset, self.rng, self.alpha) \
            if clip_index is None else clip_index
        clip = self.dataset[idx]
        ref, t0 = init_episode(clip, self.rng)
        self.clip_idx[i] = idx
        self.t[i] = t0
        self.episode_reward[i] = 0.0
        self.episode_steps[i] = 0
        self.bs.root[i] = (ref.x, ref.z, ref.pitch)
        self.bs.root_vel[i] = (ref.vx, ref.vz, ref.pitch_rate)
        self.bs.q[i] = ref.q
        self.bs.qd[i] = ref.qd
        self.bs.anchors[i] = np.nan
        self.bs.contacts[i] = False
        self.bs.t[i] = 0.0
        self.bs.fault[i] = False
        self.bs.torso_contact[i] = False
        self.bs.torso_clearance[i] = ref.z
        if self.randomize:
            self.rands[i] = sample_randomization(self.rng)
        else:
            self.rands[i] = evaluation_randomization()
        row = per_step_state(self.bs.root[i:i + 1], self.bs.root_vel[i:i + 1],
                             self.bs.q[i:i + 1], self.bs.qd[i:i + 1])[0]
        self.buffer.reset(i, row)

    def observe(self):
        proprio = self.buffer.proprio()
        future = np.stack([
            future_targets(self.dataset[self.clip_idx[i]], self.t[i], self.bs.root[i])
            for i in range(self.n)])
        return {"proprio": proprio, "future": future}

    def step(self, actions: np.ndarray):
        """Returns (rewards, dones, timeouts, infos). Auto-resets done envs."""
        policy_step(self.bs, actions, self.terrains, self.rands, self.cfg)
        self.t += self.cfg.policy_dt
        self.episode_steps += 1
        self.buffer.push_actions(actions)
        rewards = np.empty(self.n)
        dones = np.zeros(self.n, dtype=bool)
        timeouts = np.zeros(self.n, dtype=bool)
        infos = []
        fallen = fallen_mask(self.bs)
        rows = per_step_state(self.bs.root, self.bs.root_vel, self.bs.q, self.bs.qd)
        for i in range(self.n):
            clip = self.dataset[self.clip_idx[i]]
            t = min(self.t[i], clip.duration)
            ref = frame_at(clip, t)
            r, _ = tracking_reward_terms(
                self.bs.root[i], self.bs.q[i], self.bs.root_vel[i], self.bs.qd[i],
                ref.pose, ref.velocity, self.cfg)
            rewards[i] = r
            self.episode_reward[i] += r
            cause = CONTINUE
            if self.bs.fault[i]:
                cause = FALL
            elif self.t[i] >= clip.duration - 1e-9:
                cause = END_OF_CLIP
            elif fallen[i]:
                cause = FALL
            else:
                dp = np.hypot(self.bs.root[i, 0] - ref.x, self.bs.root[i, 1] - ref.z)
                if dp > DEVIATION_POSITION or \
                        abs(self.bs.root[i, 2] - ref.pitch) > DEVIATION_ORIENTATION:
                    cause = DEVIATION
            if cause != CONTINUE:
                dones[i] = True
                timeouts[i] = cause == END_OF_CLIP
                mean_r = self.episode_reward[i] / self.episode_steps[i]
                info = {"env": i, "cause": cause, "clip": int(self.clip_idx[i]),
                        "normalized_reward": float(mean_r),
                        "steps": int(self.episode_steps[i])}
                if timeouts[i]:
                    # terminal observation for bootstrapping, pre-reset
                    stack = self.buffer.states[i].copy()
                    stack[:-1] = stack[1:]
                    stack[-1] = rows[i]
                    info["terminal_proprio"] = np.concatenate(
                        [stack.reshape(-1), self.buffer.actions[i].reshape(-1)])
                    info["terminal_future"] = future_targets(
                        clip, t, self.bs.root[i])
                infos.append(info)
                self.dataset.update_return(int(self.clip_idx[i]), mean_r)
                self.reset_env(i)
            else:
                self.buffer.states[i, :-1] = self.buffer.states[i, 1:]
                self.buffer.states[i, -1] = rows[i]
        return rewards, dones, timeouts, infos
