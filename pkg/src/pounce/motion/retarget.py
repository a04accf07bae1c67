"""Source-skeleton to robot retargeting.

Keypoints on the source (front/hind reference joints and the four toes)
define the robot root pose; toe targets are then solved per leg with a
damped-least-squares two-link IK in the leg's sagittal plane. The root
is lowered and the lateral leg spacing widened to soften the morphology
gap before the sagittal projection drops the lateral axis entirely.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .bvh import (Frame, Joint, MotionClip, Skeleton, euler_to_quat,
                  forward_kinematics, quat_mul, quat_rotate)

IK_MAX_ITERS = 50
IK_TOLERANCE = 1e-3       # meters
IK_DAMPING = 1e-3
MAX_FAILURE_FRACTION = 0.05

LEGS = ("FL", "FR", "HL", "HR")


class RetargetError(ValueError):
    pass


@dataclasses.dataclass
class RobotMorphology:
    """Reduced quadruped: hip pivots in the root frame plus two link lengths."""
    hip_x: float = 0.27
    hip_y: float = 0.12
    l1: float = 0.21
    l2: float = 0.21

    def hip_offset(self, leg: str) -> np.ndarray:
        sx = 1.0 if leg[0] == "F" else -1.0
        sy = 1.0 if leg[1] == "L" else -1.0
        return np.array([sx * self.hip_x, sy * self.hip_y, 0.0])

    def knee_sign(self, leg: str) -> float:
        return -1.0 if leg[0] == "F" else 1.0

    @property
    def reach(self) -> float:
        return self.l1 + self.l2


@dataclasses.dataclass
class KeypointMap:
    """Source joints defining the robot frame: front/hind reference sets
    (shoulder/haunch analogs) and one toe joint per leg (its end site is
    used when present)."""
    front: list
    hind: list
    toes: dict                    # leg name -> source joint name

    def validate(self):
        if not self.front or not self.hind:
            raise RetargetError("front and hind reference joints are required")
        missing = [leg for leg in LEGS if leg not in self.toes]
        if missing:
            raise RetargetError(f"toe keypoints missing for {missing}")
        return self


@dataclasses.dataclass
class RetargetConfig:
    root_height_scale: float = 0.90   # lower the root by 10%
    leg_spacing_scale: float = 1.15   # widen left/right spacing


@dataclasses.dataclass
class RetargetReport:
    ik_failures: list                 # (frame index, leg, residual)
    n_frames: int

    @property
    def failure_fraction(self) -> float:
        frames = {f for f, _, _ in self.ik_failures}
        return len(frames) / max(self.n_frames, 1)


def two_link_ik(target: np.ndarray, l1: float, l2: float, knee_sign: float,
                q_init: np.ndarray | None = None):
    """Solve (hip, knee) so the planar foot point reaches `target` (x, z)
    relative to the hip pivot. Damped least squares; returns
    (angles, residual, converged)."""
    dist = float(np.hypot(target[0], target[1]))
    if dist > l1 + l2:
        # unreachable: report the best possible residual along the ray
        q = _closed_form(target, l1, l2, knee_sign, extend=True)
        return q, dist - (l1 + l2), False
    q = np.array(q_init if q_init is not None else
                 [-knee_sign * 0.5, knee_sign * 1.0])
    for _ in range(IK_MAX_ITERS):
        a1, a2 = q[0], q[0] + q[1]
        p = np.array([l1 * np.sin(a1) + l2 * np.sin(a2),
                      -l1 * np.cos(a1) - l2 * np.cos(a2)])
        err = target - p
        if err @ err < 1e-24:
            break
        J = np.array([[l1 * np.cos(a1) + l2 * np.cos(a2), l2 * np.cos(a2)],
                      [l1 * np.sin(a1) + l2 * np.sin(a2), l2 * np.sin(a2)]])
        JJt = J @ J.T + IK_DAMPING * np.eye(2)
        q = q + J.T @ np.linalg.solve(JJt, err)
    a1, a2 = q[0], q[0] + q[1]
    p = np.array([l1 * np.sin(a1) + l2 * np.sin(a2),
                  -l1 * np.cos(a1) - l2 * np.cos(a2)])
    residual = float(np.linalg.norm(target - p))
    return q, residual, residual <= IK_TOLERANCE


def _closed_form(target, l1, l2, knee_sign, extend=False):
    dist = np.hypot(target[0], target[1])
    if extend:
        dist = min(dist, l1 + l2)
    cos_k = np.clip((dist * dist - l1 * l1 - l2 * l2) / (2 * l1 * l2), -1.0, 1.0)
    knee = -np.arccos(cos_k) if knee_sign < 0 else np.arccos(cos_k)
    aim = np.arctan2(target[0], -target[1])
    hip = aim - np.arctan2(l2 * np.sin(knee), l1 + l2 * np.cos(knee))
    return np.array([hip, knee])


def closed_form_ik(target, l1, l2, knee_sign):
    """Analytic two-link solution (oracle for the iterative solver)."""
    return _closed_form(np.asarray(target, dtype=np.float64), l1, l2, knee_sign)


def _keypoint_position(skeleton, joints_pos, ends, name):
    idx = skeleton.joint_index(name)
    return ends.get(idx, joints_pos[idx])


def retarget_clip(clip: MotionClip, src: Skeleton, morph: RobotMorphology,
                  keypoints: KeypointMap,
                  cfg: RetargetConfig | None = None) -> tuple:
    """Retarget a source clip onto the reduced robot.

    Returns (robot MotionClip with 8 joint angles, RetargetReport); raises
    RetargetError when more than 5% of frames have an unreachable toe.
    """
    cfg = cfg or RetargetConfig()
    keypoints.validate()
    frames_out = []
    failures = []
    prev_q = {leg: None for leg in LEGS}
    for fi, frame in enumerate(clip.frames):
        joints_pos, ends = forward_kinematics(src, frame)
        front = np.mean([_keypoint_position(src, joints_pos, ends, n)
                         for n in keypoints.front], axis=0)
        hind = np.mean([_keypoint_position(src, joints_pos, ends, n)
                        for n in keypoints.hind], axis=0)
        root = (front + hind) / 2.0
        root = np.array([root[0], root[1], root[2] * cfg.root_height_scale])
        fwd = front - hind
        yaw = np.arctan2(fwd[1], fwd[0])
        pitch = np.arctan2(fwd[2], np.hypot(fwd[0], fwd[1]))
        quat = quat_mul(euler_to_quat(np.array([yaw]), "Z"),
                        euler_to_quat(np.array([-pitch]), "Y"))

        q8 = np.empty(8)
        for li, leg in enumerate(LEGS):
            toe_w = _keypoint_position(src, joints_pos, ends, keypoints.toes[leg])
            local = _world_to_base(toe_w - root, quat)
            local[1] *= cfg.leg_spacing_scale
            rel = local - morph.hip_offset(leg)
            q, residual, ok = two_link_ik(
                np.array([rel[0], rel[2]]), morph.l1, morph.l2,
                morph.knee_sign(leg), prev_q[leg])
            prev_q[leg] = q
            if not ok:
                failures.append((fi, leg, residual))
            q8[2 * li] = q[0]
            q8[2 * li + 1] = q[1]
        # robot clips store Yrotation-convention angles (negated planar)
        frames_out.append(Frame(root_position=root, root_orientation=quat,
                                joint_angles=-q8))
    report = RetargetReport(ik_failures=failures, n_frames=len(clip.frames))
    if report.failure_fraction > MAX_FAILURE_FRACTION:
        raise RetargetError(
            f"{report.failure_fraction:.1%} of frames failed IK "
            f"(limit {MAX_FAILURE_FRACTION:.0%})")
    out = MotionClip(id=clip.id, rate_hz=clip.rate_hz, frames=frames_out,
                     gait_label=clip.gait_label).validate()
    return out, report


def _world_to_base(v: np.ndarray, quat: np.ndarray) -> np.ndarray:
    w, x, y, z = quat
    conj = np.array([w, -x, -y, -z])
    return quat_rotate(conj, v)


def robot_skeleton(morph: RobotMorphology) -> Skeleton:
    """BVH-style skeleton of the reduced robot (for fixtures and export).

    Leg joints rotate about -Y so their channel values equal the planar
    convention (positive swings the toe forward).
    """
    joints = [Joint(name="root", parent=-1, offset=np.zeros(3),
                    channels=["Xposition", "Yposition", "Zposition",
                              "Zrotation", "Yrotation", "Xrotation"])]
    end_sites = {}
    for leg in LEGS:
        hip_idx = len(joints)
        joints.append(Joint(name=f"hip_{leg}", parent=0,
                            offset=morph.hip_offset(leg), channels=["Yrotation"]))
        knee_idx = len(joints)
        joints.append(Joint(name=f"knee_{leg}", parent=hip_idx,
                            offset=np.array([0.0, 0.0, -morph.l1]),
                            channels=["Yrotation"]))
        end_sites[knee_idx] = np.array([0.0, 0.0, -morph.l2])
    return Skeleton(joints=joints, end_sites=end_sites).validate()


def robot_frame(morph: RobotMorphology, root_pos, quat, q8) -> Frame:
    """Frame for robot_skeleton from planar-convention joint angles."""
    return Frame(root_position=np.asarray(root_pos, dtype=np.float64),
                 root_orientation=np.asarray(quat, dtype=np.float64),
                 joint_angles=-np.asarray(q8, dtype=np.float64))
