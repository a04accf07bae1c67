"""Stage-2 scenario environments.

Flat and stairs use the dense command reward every step; creep, hurdle,
and block courses keep the dense direction term but award the speed
term only on success, as a terminal bonus on the episode-average
projected speed. Fall recovery drops the robot passively for one second
from random joint poses, then shapes righting progress.
"""

from __future__ import annotations

import numpy as np

from ..pmc.obs import ProprioBuffer, per_step_state
from ..sim.config import N_JOINTS, SimConfig
from ..sim.engine import BatchState, fallen_mask, policy_step
from ..sim.randomize import evaluation_randomization, sample_randomization
from ..sim.sensors import exteroception
from ..sim.terrain import flat_terrain, generate_terrain
from .rewards import (command_reward, nav_speed_reward, fall_recovery_reward,
                      stair_edge_penalty)

SCENARIOS = ("flat", "creep", "hurdles", "blocks", "stairs", "recovery")
SPARSE_SCENARIOS = ("creep", "hurdles", "blocks")
SPEED_RANGE = (0.5, 3.0)
FLAT_HORIZON = 10.0
RECOVERY_HORIZON = 4.0
COMMAND_RESAMPLE = 5.0          # seconds, flat terrain only
FACING_THRESHOLD = 0.05         # m/s of filtered forward speed
DROP_HEIGHT = 1.0
DROP_TIME = 1.0


def sample_speed(rng) -> float:
    return float(rng.uniform(*SPEED_RANGE))


class EpmcEnv:
    """N parallel episodes of one scenario."""

    def __init__(self, scenario: str, n_envs: int, seed: int = 0,
                 cfg: SimConfig | None = None, randomize: bool = True,
                 horizon: float | None = None, hold_command: bool = False):
        if scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {scenario!r}")
        self.scenario = scenario
        self.hold_command = hold_command
        self.cfg = cfg or SimConfig()
        self.rng = np.random.default_rng(seed)
        self.randomize = randomize
        self.n = n_envs
        self.bs = BatchState(n_envs, self.cfg)
        self.terrains = [flat_terrain()] * n_envs
        self.rands = [evaluation_randomization()] * n_envs
        self.buffer = ProprioBuffer(n_envs)
        self.command_dir = np.ones(n_envs)      # +1 / -1 along x
        self.command_speed = np.full(n_envs, 1.0)
        self.facing = np.ones(n_envs)
        self.vx_filtered = np.zeros(n_envs)
        self.horizon_s = horizon
        self.horizon = np.zeros(n_envs)
        self.speed_sum = np.zeros(n_envs)
        self.reward_sum = np.zeros(n_envs)
        self.steps = np.zeros(n_envs, dtype=np.int64)
        self.prev_gravity_z = np.zeros(n_envs)
        self._standing = None
        for i in range(n_envs):
            self.reset_env(i)

    # -- episode management ------------------------------------------------------

    def _default_horizon(self, terrain) -> float:
        if self.scenario == "flat":
            return FLAT_HORIZON
        if self.scenario == "recovery":
            return RECOVERY_HORIZON
        return max(15.0, terrain.course_end / 1.0 + 10.0)

    def reset_env(self, i: int):
        rng = self.rng
        if self.scenario in ("flat", "recovery"):
            terrain = flat_terrain()
        else:
            terrain = generate_terrain(self.scenario, rng)
        self.terrains[i] = terrain
        if self.randomize:
            rand = sample_randomization(rng)
        else:
            rand = evaluation_randomization()
        rand.cylinder_radii = terrain.edges[:, 2].copy() if terrain.edges.size else \
            np.empty(0)
        self.rands[i] = rand

        if self.scenario == "recovery":
            self._reset_recovery(i)
        else:
            self._reset_standing(i)
        self.command_speed[i] = sample_speed(rng)
        if self.scenario == "flat":
            self.command_dir[i] = 1.0 if rng.random() < 0.5 else -1.0
        else:
            self.command_dir[i] = 1.0
        self.facing[i] = self.command_dir[i]
        self.vx_filtered[i] = 0.0
        self.horizon[i] = self.horizon_s or self._default_horizon(terrain)
        self.speed_sum[i] = 0.0
        self.reward_sum[i] = 0.0
        self.steps[i] = 0
        self.prev_gravity_z[i] = -np.cos(self.bs.root[i, 2])
        row = per_step_state(self.bs.root[i:i + 1], self.bs.root_vel[i:i + 1],
                             self.bs.q[i:i + 1], self.bs.qd[i:i + 1])[0]
        self.buffer.reset(i, row)

    def _reset_standing(self, i: int):
        from ..sim.engine import standing_state
        if self._standing is None:
            self._standing = standing_state(self.cfg)
        s = self._standing
        self.bs.set_state(i, s)
        self.bs.t[i] = 0.0
        self.bs.fault[i] = False

    def _reset_recovery(self, i: int):
        from ..sim.engine import joint_limits
        rng = self.rng
        lo, hi = joint_limits(self.cfg)
        sub = BatchState(1, self.cfg)
        sub.q[0] = rng.uniform(lo, hi)
        sub.root[0] = (0.0, DROP_HEIGHT, rng.uniform(-np.pi, np.pi))
        passive = SimConfig(kp=0.0, kd=0.0, seed=self.cfg.seed)
        quiet = evaluation_randomization()
        for _ in range(int(DROP_TIME / passive.policy_dt)):
            policy_step(sub, np.zeros((1, N_JOINTS)), [self.terrains[i]],
                        [quiet], passive)
        self.bs.set_state(i, sub.state(0))
        self.bs.t[i] = 0.0
        self.bs.fault[i] = False

    # -- observations ------------------------------------------------------------

    def observe(self) -> dict:
        height = np.empty((self.n, 25, 13))
        depth = np.empty((self.n, 25, 13))
        rays = np.empty((self.n, 128))
        for i in range(self.n):
            ext = exteroception(self.bs.state(i), self.terrains[i])
            height[i] = ext.height_grid
            depth[i] = ext.depth_grid
            rays[i] = ext.rays
        command = np.stack([self.command_dir, np.zeros(self.n),
                            self.command_speed], axis=1)
        return {"proprio": self.buffer.proprio(), "command": command,
                "height_grid": height, "depth_grid": depth, "rays": rays}

    # -- stepping -----------------------------------------------------------------

    def step(self, motor_actions: np.ndarray):
        """Returns (rewards, dones, timeouts, infos). Rewards hold the
        scenario terms; GAIL is added by the flat-terrain trainer."""
        policy_step(self.bs, motor_actions, self.terrains, self.rands, self.cfg)
        self.steps += 1
        self.buffer.push_actions(motor_actions)
        rows = per_step_state(self.bs.root, self.bs.root_vel, self.bs.q, self.bs.qd)
        fallen = fallen_mask(self.bs) | self.bs.fault
        rewards = np.zeros(self.n)
        dones = np.zeros(self.n, dtype=bool)
        timeouts = np.zeros(self.n, dtype=bool)
        infos = []
        # filtered forward speed drives the planar facing estimate
        self.vx_filtered = 0.8 * self.vx_filtered + 0.2 * self.bs.root_vel[:, 0]
        self.facing = np.where(self.vx_filtered > FACING_THRESHOLD, 1.0,
                               np.where(self.vx_filtered < -FACING_THRESHOLD,
                                        -1.0, self.facing))
        for i in range(self.n):
            t = self.steps[i] * self.cfg.policy_dt
            projected = self.command_dir[i] * self.bs.root_vel[i, 0]
            self.speed_sum[i] += projected
            success = False
            cause = None
            if self.scenario == "recovery":
                g_now = -np.cos(self.bs.root[i, 2])
                rewards[i] = fall_recovery_reward(
                    g_now, self.prev_gravity_z[i], self.bs.root_vel[i, 2],
                    self.bs.q[i], self.bs.qd[i], self.cfg.nominal_pose)
                self.prev_gravity_z[i] = g_now
                if t >= self.horizon[i]:
                    cause = "timeout"
                    timeouts[i] = True
            else:
                r_dir_term = 0.5 * np.exp(-5.0 * abs(1.0 - self.command_dir[i]
                                                     * self.facing[i]))
                if self.scenario in SPARSE_SCENARIOS:
                    rewards[i] = r_dir_term
                else:
                    rewards[i] = r_dir_term + 0.5 * nav_speed_reward(
                        self.command_speed[i], projected)
                if self.scenario == "stairs":
                    rewards[i] += stair_edge_penalty(
                        self.bs.contacts[i], self.bs.foot_pos[i],
                        self.terrains[i].xs)
                self.reward_sum[i] += rewards[i]
                if fallen[i]:
                    cause = "fall"
                elif self.scenario != "flat" and \
                        self.bs.root[i, 0] >= self.terrains[i].course_end:
                    cause = "success"
                    success = True
                    if self.scenario in SPARSE_SCENARIOS:
                        avg = self.speed_sum[i] / self.steps[i]
                        rewards[i] += 0.5 * nav_speed_reward(
                            self.command_speed[i], avg) * self.steps[i]
                elif t >= self.horizon[i]:
                    cause = "timeout"
                    timeouts[i] = self.scenario == "flat"
                if self.scenario == "flat" and cause is None and \
                        not self.hold_command and \
                        t % COMMAND_RESAMPLE < self.cfg.policy_dt * 0.5:
                    self.command_dir[i] = 1.0 if self.rng.random() < 0.5 else -1.0
            if cause is not None:
                dones[i] = True
                infos.append({
                    "env": i, "cause": cause, "success": success,
                    "steps": int(self.steps[i]),
                    "mean_command_reward": float(self.reward_sum[i]
                                                 / max(self.steps[i], 1)),
                    "avg_projected_speed": float(self.speed_sum[i]
                                                 / max(self.steps[i], 1)),
                    "command_speed": float(self.command_speed[i])})
                self.reset_env(i)
            else:
                self.buffer.states[i, :-1] = self.buffer.states[i, 1:]
                self.buffer.states[i, -1] = rows[i]
        return rewards, dones, timeouts, infos
