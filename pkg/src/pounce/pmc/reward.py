"""Imitation tracking reward.

Five exponential kernels over joint angles, joint velocities, toe
positions (relative to the root), root pose, and root velocities, with
weights (0.6, 0.05, 0.1, 0.15, 0.1) that sum to one so perfect tracking
scores exactly 1.0.
"""

from __future__ import annotations

import numpy as np

from ..motion.planar import PlanarFrame
from ..sim.config import HIP_X, SimConfig
from ..sim.engine import RobotState

W_JOINT_POS = 0.6
W_JOINT_VEL = 0.05
W_KEYPOINT = 0.1
W_ROOT_POSE = 0.15
W_ROOT_VEL = 0.1

K_JOINT_POS = 1.0
K_JOINT_VEL = 0.1
K_KEYPOINT = 40.0
K_ROOT_POS = 20.0
K_ROOT_ANG = 10.0
K_ROOT_LINVEL = 2.0
K_ROOT_ANGVEL = 0.2


def toe_positions_base(q: np.ndarray, cfg: SimConfig) -> np.ndarray:
    """Toe (x, z) relative to the root, base frame; q may be (..., 8)."""
    q = np.asarray(q)
    qh = q[..., 0::2]
    qk = q[..., 1::2]
    a2 = qh + qk
    x = HIP_X + cfg.l1 * np.sin(qh) + cfg.l2 * np.sin(a2)
    z = -cfg.l1 * np.cos(qh) - cfg.l2 * np.cos(a2)
    return np.stack([x, z], axis=-1)


def tracking_reward(state: RobotState, ref: PlanarFrame,
                    cfg: SimConfig | None = None) -> float:
    cfg = cfg or SimConfig()
    r, _ = tracking_reward_terms(
        np.array([state.x, state.z, state.pitch]), state.q,
        np.array([state.vx, state.vz, state.pitch_rate]), state.qd,
        ref.pose, ref.velocity, cfg)
    return float(r)


def tracking_reward_terms(root_pose, q, root_vel, qd,
                          ref_pose, ref_vel, cfg: SimConfig):
    """Batched reward; leading axes broadcast. Returns (reward, terms)."""
    root_pose = np.asarray(root_pose)
    ref_pose = np.asarray(ref_pose)
    dq = np.asarray(ref_pose)[..., 3:] - np.asarray(q)
    r_jp = np.exp(-K_JOINT_POS * (dq * dq).sum(axis=-1))
    dqd = np.asarray(ref_vel)[..., 3:] - np.asarray(qd)
    r_jv = np.exp(-K_JOINT_VEL * (dqd * dqd).sum(axis=-1))

    toes = toe_positions_base(q, cfg)
    toes_ref = toe_positions_base(np.asarray(ref_pose)[..., 3:], cfg)
    dk = toes_ref - toes
    r_k = np.exp(-K_KEYPOINT * (dk * dk).sum(axis=(-1, -2)))

    dp = ref_pose[..., 0:2] - root_pose[..., 0:2]
    theta = ref_pose[..., 2] - root_pose[..., 2]
    r_root = np.exp(-K_ROOT_POS * (dp * dp).sum(axis=-1) - K_ROOT_ANG * theta * theta)

    dv = np.asarray(ref_vel)[..., 0:2] - np.asarray(root_vel)[..., 0:2]
    dw = np.asarray(ref_vel)[..., 2] - np.asarray(root_vel)[..., 2]
    r_vel = np.exp(-K_ROOT_LINVEL * (dv * dv).sum(axis=-1) - K_ROOT_ANGVEL * dw * dw)

    reward = (W_JOINT_POS * r_jp + W_JOINT_VEL * r_jv + W_KEYPOINT * r_k
              + W_ROOT_POSE * r_root + W_ROOT_VEL * r_vel)
    terms = {"joint_pos": r_jp, "joint_vel": r_jv, "keypoint": r_k,
             "root_pose": r_root, "root_vel": r_vel}
    return reward, terms


WEIGHTS = (W_JOINT_POS, W_JOINT_VEL, W_KEYPOINT, W_ROOT_POSE, W_ROOT_VEL)
