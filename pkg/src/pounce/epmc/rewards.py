"""Stage-2 reward terms: navigation command compliance, stair edge
penalty, and fall recovery shaping."""

from __future__ import annotations

import numpy as np

DIR_WEIGHT = 0.5
VEL_WEIGHT = 0.5
STAIR_EDGE_MARGIN = 0.05
STAIR_EDGE_PENALTY = 0.25


def nav_direction_reward(command_dir: np.ndarray, facing_dir: np.ndarray) -> float:
    """exp(-5 |1 - d . d_hat|) for unit vectors d, d_hat."""
    d = np.asarray(command_dir, dtype=np.float64)
    f = np.asarray(facing_dir, dtype=np.float64)
    for v in (d, f):
        if abs(np.linalg.norm(v) - 1.0) > 1e-9:
            raise ValueError("direction reward expects unit vectors")
    return float(np.exp(-5.0 * abs(1.0 - float(d @ f))))


def nav_speed_reward(target_speed: float, projected_speed: float) -> float:
    """exp(-4 |v* - d . v|)."""
    return float(np.exp(-4.0 * abs(target_speed - projected_speed)))


def command_reward(command_dir, facing_dir, target_speed, projected_speed) -> float:
    return (DIR_WEIGHT * nav_direction_reward(command_dir, facing_dir)
            + VEL_WEIGHT * nav_speed_reward(target_speed, projected_speed))


def stair_edge_penalty(toe_contacts, toe_positions, edges_x: np.ndarray) -> float:
    """-0.25 per toe in contact strictly closer than 5 cm to a step edge."""
    total = 0.0
    for in_contact, pos in zip(toe_contacts, toe_positions):
        if not in_contact or edges_x.size == 0:
            continue
        if np.min(np.abs(edges_x - pos[0])) < STAIR_EDGE_MARGIN:
            total -= STAIR_EDGE_PENALTY
    return total


W_ORIENT = 80.0
W_ANGVEL = -0.1
W_JOINT_POSE = -0.015
W_JOINT_VEL = -0.015


def fall_recovery_reward(gravity_z_now: float, gravity_z_prev: float,
                         angular_velocity: float, q: np.ndarray,
                         qd: np.ndarray, nominal_q: np.ndarray) -> float:
    """Orientation progress (sign fixed so righting sums positive) minus
    spin, pose, and joint-velocity penalties."""
    r_o = -(gravity_z_now - gravity_z_prev)
    r_w = float(angular_velocity) ** 2
    dq = np.asarray(nominal_q) - np.asarray(q)
    r_jp = float(dq @ dq)
    r_jv = float(np.asarray(qd) @ np.asarray(qd))
    return W_ORIENT * r_o + W_ANGVEL * r_w + W_JOINT_POSE * r_jp + W_JOINT_VEL * r_jv
