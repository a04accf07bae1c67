"""Observation encoding for the primitive controller.

Proprioception stacks the last three per-step states with the last
three actions; future targets hold the reference pose at four horizons
expressed relative to the current robot frame. The layout is versioned
by OBS_VERSION and recorded in checkpoints.
"""

from __future__ import annotations

import numpy as np

from ..motion.planar import PlanarClip, frame_at
from ..sim.config import N_JOINTS

OBS_VERSION = 1
STATE_STACK = 3
ACTION_STACK = 3
PER_STEP_STATE = N_JOINTS * 2 + 2 + 1 + 3      # q, qd, v_base, pitch rate, gravity3
PROPRIO_DIM = STATE_STACK * PER_STEP_STATE + ACTION_STACK * N_JOINTS  # 90
FUTURE_HORIZONS = (0.03, 0.06, 0.3, 1.0)
FUTURE_DIM = len(FUTURE_HORIZONS) * (N_JOINTS + 3)                    # 44


# fixed feature scales keeping tanh inputs O(1); part of the versioned layout
QD_SCALE = 0.1
V_SCALE = 0.3
W_SCALE = 0.25


def per_step_state(root: np.ndarray, root_vel: np.ndarray,
                   q: np.ndarray, qd: np.ndarray) -> np.ndarray:
    """(N, 22) instantaneous state; velocities in the base frame, scaled."""
    pitch = root[:, 2]
    c, s = np.cos(pitch), np.sin(pitch)
    vx_b = c * root_vel[:, 0] + s * root_vel[:, 1]
    vz_b = -s * root_vel[:, 0] + c * root_vel[:, 1]
    grav = np.stack([-s, np.zeros_like(s), -c], axis=1)
    return np.concatenate(
        [q, qd * QD_SCALE, np.stack([vx_b * V_SCALE, vz_b * V_SCALE], axis=1),
         root_vel[:, 2:3] * W_SCALE, grav], axis=1)


class ProprioBuffer:
    """Rolling per-env stacks of states and actions."""

    def __init__(self, n_envs: int):
        self.states = np.zeros((n_envs, STATE_STACK, PER_STEP_STATE))
        self.actions = np.zeros((n_envs, ACTION_STACK, N_JOINTS))

    def reset(self, i: int, state_row: np.ndarray):
        self.states[i] = state_row[None, :]
        self.actions[i] = 0.0

    def push_state(self, rows: np.ndarray):
        self.states[:, :-1] = self.states[:, 1:]
        self.states[:, -1] = rows

    def push_actions(self, actions: np.ndarray):
        self.actions[:, :-1] = self.actions[:, 1:]
        self.actions[:, -1] = actions

    def proprio(self) -> np.ndarray:
        n = self.states.shape[0]
        return np.concatenate(
            [self.states.reshape(n, -1), self.actions.reshape(n, -1)], axis=1)


def future_targets(clip: PlanarClip, t: float, root: np.ndarray) -> np.ndarray:
    """Reference joints + relative root pose at the four future horizons.

    Queries past the clip end clamp to the final frame (the documented
    behavior for target building).
    """
    x, z, pitch = root
    out = np.empty(FUTURE_DIM)
    k = 0
    for h in FUTURE_HORIZONS:
        ref = frame_at(clip, min(t + h, clip.duration))
        c, s = np.cos(pitch), np.sin(pitch)
        dx_w, dz_w = ref.x - x, ref.z - z
        out[k:k + N_JOINTS] = ref.q
        out[k + N_JOINTS] = c * dx_w + s * dz_w
        out[k + N_JOINTS + 1] = -s * dx_w + c * dz_w
        out[k + N_JOINTS + 2] = ref.pitch - pitch
        k += N_JOINTS + 3
    return out
