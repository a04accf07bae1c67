"""Planar (sagittal) reference clips at the 50 Hz policy rate.

A PlanarFrame is 22 numbers: root x, z, pitch, 8 joint angles, then the
11 matching velocities. Velocities are central differences of the
positions (one-sided at the ends), which load/save preserve bit-exactly
through repr round-tripping.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .bvh import MotionClip, quat_rotate

PLANAR_RATE = 50.0
N_JOINTS = 8
POSE_DIM = 3 + N_JOINTS
MIN_SPAN = 0.1
# column swap that mirrors left/right legs: FL<->FR, HL<->HR
MIRROR_COLUMNS = np.array([2, 3, 0, 1, 6, 7, 4, 5])


@dataclasses.dataclass
class PlanarFrame:
    x: float
    z: float
    pitch: float
    q: np.ndarray
    vx: float
    vz: float
    pitch_rate: float
    qd: np.ndarray

    @property
    def pose(self) -> np.ndarray:
        return np.concatenate([[self.x, self.z, self.pitch], self.q])

    @property
    def velocity(self) -> np.ndarray:
        return np.concatenate([[self.vx, self.vz, self.pitch_rate], self.qd])


@dataclasses.dataclass
class PlanarClip:
    id: str
    pos: np.ndarray               # (F, 11)
    vel: np.ndarray               # (F, 11)
    gait_label: str | None = None
    rate_hz: float = PLANAR_RATE

    def validate(self):
        if self.rate_hz != PLANAR_RATE:
            raise ValueError("planar clips are fixed at 50 Hz")
        if self.pos.shape != self.vel.shape or self.pos.shape[1] != POSE_DIM:
            raise ValueError("planar clip arrays must be (F, 11)")
        if len(self.pos) < 2:
            raise ValueError("clip needs at least 2 frames")
        expect = central_differences(self.pos, self.rate_hz)
        if np.max(np.abs(expect - self.vel)) > 1e-9:
            raise ValueError("velocities inconsistent with central differences")
        return self

    @property
    def n_frames(self) -> int:
        return len(self.pos)

    @property
    def duration(self) -> float:
        return (self.n_frames - 1) / self.rate_hz

    def frame(self, i: int) -> PlanarFrame:
        p, v = self.pos[i], self.vel[i]
        return PlanarFrame(x=p[0], z=p[1], pitch=p[2], q=p[3:].copy(),
                           vx=v[0], vz=v[1], pitch_rate=v[2], qd=v[3:].copy())


def central_differences(pos: np.ndarray, rate_hz: float) -> np.ndarray:
    vel = np.empty_like(pos)
    dt = 1.0 / rate_hz
    vel[1:-1] = (pos[2:] - pos[:-2]) / (2 * dt)
    vel[0] = (pos[1] - pos[0]) / dt
    vel[-1] = (pos[-1] - pos[-2]) / dt
    return vel


def make_clip(clip_id: str, pos: np.ndarray, gait_label=None) -> PlanarClip:
    pos = np.asarray(pos, dtype=np.float64)
    return PlanarClip(id=clip_id, pos=pos,
                      vel=central_differences(pos, PLANAR_RATE),
                      gait_label=gait_label).validate()


def frame_at(clip: PlanarClip, t: float) -> PlanarFrame:
    """Linear interpolation; exact at sample instants."""
    if t < -1e-12 or t > clip.duration + 1e-12:
        raise ValueError(f"t={t} outside [0, {clip.duration}]")
    ft = np.clip(t, 0.0, clip.duration) * clip.rate_hz
    i0 = int(np.floor(ft + 1e-9))
    if i0 >= clip.n_frames - 1:
        return clip.frame(clip.n_frames - 1)
    a = ft - i0
    if a <= 1e-9:
        return clip.frame(i0)
    p = (1 - a) * clip.pos[i0] + a * clip.pos[i0 + 1]
    v = (1 - a) * clip.vel[i0] + a * clip.vel[i0 + 1]
    return PlanarFrame(x=p[0], z=p[1], pitch=p[2], q=p[3:],
                       vx=v[0], vz=v[1], pitch_rate=v[2], qd=v[3:])


def mirror_clip(clip: PlanarClip) -> PlanarClip:
    """Swap left/right legs; the sagittal root trajectory is unchanged."""
    cols = np.concatenate([np.arange(3), 3 + MIRROR_COLUMNS])
    return PlanarClip(id=clip.id + "~m", pos=clip.pos[:, cols].copy(),
                      vel=clip.vel[:, cols].copy(),
                      gait_label=clip.gait_label).validate()


def project_sagittal(clip: MotionClip, clip_id: str | None = None,
                     gait_label=None) -> PlanarClip:
    """Project a retargeted 8-joint clip onto the sagittal plane at 50 Hz.

    Forward progress is measured along the clip's dominant horizontal
    direction; pitch is the elevation of the body forward axis within
    that vertical plane.
    """
    clip.validate()
    if len(clip.frames[0].joint_angles) != N_JOINTS:
        raise ValueError("sagittal projection expects an 8-joint robot clip")
    span = clip.duration
    if span < MIN_SPAN:
        raise ValueError(f"clip span {span:.3f}s shorter than {MIN_SPAN}s")

    disp = clip.frames[-1].root_position - clip.frames[0].root_position
    horiz = disp[:2]
    if np.linalg.norm(horiz) < 1e-9:
        fwd0 = quat_rotate(clip.frames[0].root_orientation, np.array([1.0, 0, 0]))
        horiz = fwd0[:2]
        if np.linalg.norm(horiz) < 1e-9:
            horiz = np.array([1.0, 0.0])
    direction = horiz / np.linalg.norm(horiz)

    origin = clip.frames[0].root_position[:2]
    src = np.empty((len(clip.frames), POSE_DIM))
    for i, f in enumerate(clip.frames):
        src[i, 0] = (f.root_position[:2] - origin) @ direction
        src[i, 1] = f.root_position[2]
        fwd = quat_rotate(f.root_orientation, np.array([1.0, 0, 0]))
        src[i, 2] = np.arctan2(fwd[2], fwd[:2] @ direction)
        # robot clips store Yrotation angles; planar legs rotate about -y
        src[i, 3:] = -f.joint_angles
    # unwrap angles along time so interpolation takes the short arc
    src[:, 2] = np.unwrap(src[:, 2])
    src[:, 3:] = np.unwrap(src[:, 3:], axis=0)

    n_out = int(np.floor(span * PLANAR_RATE + 1e-9)) + 1
    t_src = np.arange(len(clip.frames)) / clip.rate_hz
    t_out = np.arange(n_out) / PLANAR_RATE
    pos = np.empty((n_out, POSE_DIM))
    for c in range(POSE_DIM):
        pos[:, c] = np.interp(t_out, t_src, src[:, c])
    return make_clip(clip_id or clip.id, pos, gait_label or clip.gait_label)


def save_planar(clip: PlanarClip) -> str:
    lines = [f"planar-clip v1 {clip.id} {clip.rate_hz:g} {clip.n_frames}"]
    for p, v in zip(clip.pos, clip.vel):
        row = np.concatenate([p, v])
        lines.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def load_planar(text: str) -> PlanarClip:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[:2] != ["planar-clip", "v1"]:
        raise ValueError("not a planar-clip v1 document")
    clip_id, rate, n = head[2], float(head[3]), int(head[4])
    if len(lines) - 1 != n:
        raise ValueError(f"expected {n} frame rows, found {len(lines) - 1}")
    rows = np.array([[float(tok) for tok in ln.split()] for ln in lines[1:]])
    if rows.shape[1] != 2 * POSE_DIM:
        raise ValueError("planar frame rows must hold 22 numbers")
    return PlanarClip(id=clip_id, pos=rows[:, :POSE_DIM], vel=rows[:, POSE_DIM:],
                      rate_hz=rate).validate()


def load_annotations(text: str) -> dict:
    """Sidecar lines of `<clip-id> <gait-label>`."""
    out = {}
    for ln in text.splitlines():
        if not ln.strip() or ln.lstrip().startswith("#"):
            continue
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"bad annotation line: {ln!r}")
        out[parts[0]] = parts[1]
    return out
