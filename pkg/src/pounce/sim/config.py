"""Reduced planar quadruped model constants and simulator configuration.

The robot lives in the sagittal (x, z) plane: a rigid torso plus four
two-link legs (hip, knee per leg). Legs are massless; each actuated
joint carries a reflected rotor inertia, and ground reaction forces are
transmitted to the torso at the contact points. Joint order is
[FL hip, FL knee, FR hip, FR knee, HL hip, HL knee, HR hip, HR knee].
"""

from __future__ import annotations

import dataclasses

import numpy as np

N_JOINTS = 8
N_LEGS = 4
LEG_NAMES = ("FL", "FR", "HL", "HR")
# x offset of each leg's hip pivot in the base frame (front legs forward)
HIP_X = np.array([0.27, 0.27, -0.27, -0.27])
GRAVITY = 9.81


@dataclasses.dataclass
class SimConfig:
    dt: float = 0.002                 # inner integration step (500 Hz)
    substeps: int = 10                # inner steps per policy step (50 Hz)
    kp: float = 60.0                  # PD position gain, all joints
    kd: float = 1.0                   # PD damping gain
    torso_mass: float = 12.0
    torso_inertia: float = 0.25       # pitch inertia about COM
    torso_length: float = 0.62        # box extents for torso contact
    torso_height: float = 0.14
    rotor_inertia: float = 0.008      # reflected inertia per joint
    l1: float = 0.21                  # thigh length
    l2: float = 0.21                  # shank length
    contact_k: float = 2.0e4          # penalty spring stiffness
    contact_c: float = 30.0           # penalty damping (explicit-stable at dt)
    friction_k: float = 2.0e4         # tangential anchor spring
    friction_c: float = 30.0
    contact_force_cap: float = 600.0  # per-point safety cap
    residual_bound: float = 0.6       # |action| clamp in rad
    hip_limits: tuple = (-1.3, 1.6)
    knee_limits: tuple = (-2.5, -0.1)
    nominal_hip: float = 0.6          # quiet-standing pose
    nominal_knee: float = -1.2
    seed: int = 0

    def __post_init__(self):
        period = self.dt * self.substeps
        if abs(period - 0.02) > 1e-12:
            raise ValueError("policy period must be 0.02 s (50 Hz)")

    @property
    def policy_dt(self) -> float:
        return self.dt * self.substeps

    @property
    def nominal_pose(self) -> np.ndarray:
        """Standing pose; hind legs mirror the front (knees bend inward)."""
        h, k = self.nominal_hip, self.nominal_knee
        return np.array([h, k, h, k, -h, -k, -h, -k])

    @property
    def standing_root_height(self) -> float:
        """Root height with toes on the ground in the nominal pose."""
        depth = (self.l1 * np.cos(self.nominal_hip)
                 + self.l2 * np.cos(self.nominal_hip + self.nominal_knee))
        # static equilibrium penetration of the four feet
        pen = self.torso_mass * GRAVITY / (N_LEGS * self.contact_k)
        return float(depth - pen)
