"""BVH 1.0 parsing, serialization, and forward kinematics.

Files are interpreted with meters and a Z-up world (our fixture
convention; use `swap_y_up` when importing Y-up captures). Root
translation/rotation channels become the root pose; every other joint's
rotation channels are flattened, in hierarchy order, into
Frame.joint_angles (radians).
"""

from __future__ import annotations

import dataclasses
import io

import numpy as np
from scipy.spatial.transform import Rotation

_CHANNEL_NAMES = {"Xposition", "Yposition", "Zposition",
                  "Xrotation", "Yrotation", "Zrotation"}


class BvhError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclasses.dataclass
class Joint:
    name: str
    parent: int
    offset: np.ndarray            # (3,) meters
    channels: list                # declared channel order


@dataclasses.dataclass
class Skeleton:
    joints: list                  # of Joint, root first, parents before children
    end_sites: dict               # joint index -> (3,) offset

    def validate(self):
        if not self.joints or self.joints[0].parent != -1:
            raise BvhError("joint 0 must be the root with parent -1")
        for i, j in enumerate(self.joints[1:], start=1):
            if not (-1 < j.parent < i):
                raise BvhError(f"joint {i} parent {j.parent} out of order")
        for j in self.joints:
            if not np.all(np.isfinite(j.offset)):
                raise BvhError(f"non-finite offset for joint {j.name}")
        return self

    def joint_index(self, name: str) -> int:
        for i, j in enumerate(self.joints):
            if j.name == name:
                return i
        raise KeyError(name)

    @property
    def n_channels(self) -> int:
        return sum(len(j.channels) for j in self.joints)


@dataclasses.dataclass
class Frame:
    root_position: np.ndarray     # (3,)
    root_orientation: np.ndarray  # unit quaternion (w, x, y, z)
    joint_angles: np.ndarray      # radians, non-root rotation channels

    def validate(self):
        if abs(np.linalg.norm(self.root_orientation) - 1.0) > 1e-6:
            raise ValueError("root orientation quaternion not unit norm")
        return self


@dataclasses.dataclass
class MotionClip:
    id: str
    rate_hz: float
    frames: list
    gait_label: str | None = None

    def validate(self):
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        if len(self.frames) < 2:
            raise ValueError("clip needs at least 2 frames")
        dim = len(self.frames[0].joint_angles)
        for f in self.frames:
            if len(f.joint_angles) != dim:
                raise ValueError("inconsistent frame dimensionality")
        return self

    @property
    def duration(self) -> float:
        """Time span between the first and last sample."""
        return (len(self.frames) - 1) / self.rate_hz


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    u = np.array([x, y, z])
    return v + 2.0 * np.cross(u, np.cross(u, v) + w * v)


def euler_to_quat(angles_rad: np.ndarray, order: str) -> np.ndarray:
    """Intrinsic rotations applied in BVH channel order, e.g. 'ZYX'."""
    r = Rotation.from_euler(order.upper(), angles_rad)
    q = r.as_quat()
    if q.ndim == 2:
        q = q[0]
    x, y, z, w = q
    return np.array([w, x, y, z])


def quat_to_euler(q: np.ndarray, order: str) -> np.ndarray:
    w, x, y, z = q
    return Rotation.from_quat([x, y, z, w]).as_euler(order.upper())


class _Tokens:
    def __init__(self, text: str):
        self.items = []
        for ln, raw in enumerate(text.splitlines(), start=1):
            for tok in raw.replace("{", " { ").replace("}", " } ").split():
                self.items.append((tok, ln))
        self.pos = 0

    def peek(self):
        return self.items[self.pos][0] if self.pos < len(self.items) else None

    @property
    def line(self):
        idx = min(self.pos, len(self.items) - 1)
        return self.items[idx][1] if self.items else 0

    def next(self, expect: str | None = None):
        if self.pos >= len(self.items):
            raise BvhError("unexpected end of file", self.line)
        tok, ln = self.items[self.pos]
        self.pos += 1
        if expect is not None and tok != expect:
            raise BvhError(f"expected {expect!r}, found {tok!r}", ln)
        return tok

    def floats(self, n: int) -> np.ndarray:
        vals = np.empty(n)
        for i in range(n):
            tok = self.next()
            try:
                vals[i] = float(tok)
            except ValueError:
                raise BvhError(f"expected a number, found {tok!r}", self.line) from None
        return vals


def parse_bvh(text: str, clip_id: str = "clip") -> tuple:
    """Parse a BVH document into (Skeleton, MotionClip)."""
    toks = _Tokens(text)
    toks.next("HIERARCHY")
    joints: list = []
    end_sites: dict = {}

    def parse_joint(parent: int):
        kw = toks.next()
        if kw not in ("ROOT", "JOINT"):
            raise BvhError(f"expected ROOT or JOINT, found {kw!r}", toks.line)
        name = toks.next()
        toks.next("{")
        toks.next("OFFSET")
        offset = toks.floats(3)
        toks.next("CHANNELS")
        n = int(toks.floats(1)[0])
        channels = []
        for _ in range(n):
            ch = toks.next()
            if ch not in _CHANNEL_NAMES:
                raise BvhError(f"unknown channel {ch!r}", toks.line)
            channels.append(ch)
        if parent != -1 and any(c.endswith("position") for c in channels):
            raise BvhError("position channels only supported on the root", toks.line)
        idx = len(joints)
        joints.append(Joint(name=name, parent=parent, offset=offset, channels=channels))
        while True:
            nxt = toks.peek()
            if nxt == "}":
                toks.next()
                return
            if nxt in ("JOINT", "ROOT"):
                parse_joint(idx)
            elif nxt == "End":
                toks.next()
                toks.next("Site")
                toks.next("{")
                toks.next("OFFSET")
                end_sites[idx] = toks.floats(3)
                toks.next("}")
            else:
                raise BvhError(f"unexpected token {nxt!r} in joint body", toks.line)

    parse_joint(-1)
    skeleton = Skeleton(joints=joints, end_sites=end_sites).validate()

    toks.next("MOTION")
    toks.next("Frames:")
    n_frames = int(toks.floats(1)[0])
    toks.next("Frame")
    toks.next("Time:")
    frame_time = float(toks.floats(1)[0])
    if frame_time <= 0:
        raise BvhError("frame time must be positive", toks.line)

    n_ch = skeleton.n_channels
    frames = []
    for _ in range(n_frames):
        row = toks.floats(n_ch)
        frames.append(_frame_from_row(skeleton, row))
    if toks.peek() is not None:
        raise BvhError(f"trailing data after {n_frames} frames", toks.line)
    clip = MotionClip(id=clip_id, rate_hz=1.0 / frame_time, frames=frames).validate()
    return skeleton, clip


def _frame_from_row(skeleton: Skeleton, row: np.ndarray) -> Frame:
    pos = np.zeros(3)
    quat = np.array([1.0, 0.0, 0.0, 0.0])
    angles = []
    cursor = 0
    for ji, joint in enumerate(skeleton.joints):
        rot_order = ""
        rot_vals = []
        for ch in joint.channels:
            val = row[cursor]
            cursor += 1
            if ch.endswith("position"):
                pos["XYZ".index(ch[0])] = val
            else:
                rot_order += ch[0]
                rot_vals.append(np.deg2rad(val))
        if ji == 0:
            if rot_order:
                quat = euler_to_quat(np.array(rot_vals), rot_order)
        else:
            angles.extend(rot_vals)
    return Frame(root_position=pos, root_orientation=quat,
                 joint_angles=np.array(angles)).validate()


def serialize_bvh(skeleton: Skeleton, clip: MotionClip) -> str:
    """Inverse of parse_bvh for the same skeleton layout."""
    out = io.StringIO()
    out.write("HIERARCHY\n")
    children: dict = {}
    for i, j in enumerate(skeleton.joints):
        children.setdefault(j.parent, []).append(i)

    def write_joint(idx: int, depth: int):
        j = skeleton.joints[idx]
        pad = "  " * depth
        out.write(f"{pad}{'ROOT' if j.parent == -1 else 'JOINT'} {j.name}\n")
        out.write(f"{pad}{{\n")
        out.write(f"{pad}  OFFSET {j.offset[0]:.10f} {j.offset[1]:.10f} {j.offset[2]:.10f}\n")
        out.write(f"{pad}  CHANNELS {len(j.channels)} {' '.join(j.channels)}\n")
        if idx in skeleton.end_sites:
            e = skeleton.end_sites[idx]
            out.write(f"{pad}  End Site\n{pad}  {{\n")
            out.write(f"{pad}    OFFSET {e[0]:.10f} {e[1]:.10f} {e[2]:.10f}\n")
            out.write(f"{pad}  }}\n")
        for c in children.get(idx, []):
            write_joint(c, depth + 1)
        out.write(f"{pad}}}\n")

    write_joint(0, 0)
    out.write("MOTION\n")
    out.write(f"Frames: {len(clip.frames)}\n")
    out.write(f"Frame Time: {1.0 / clip.rate_hz:.10f}\n")
    for f in clip.frames:
        out.write(" ".join(repr(float(v)) for v in _row_from_frame(skeleton, f)))
        out.write("\n")
    return out.getvalue()


def _row_from_frame(skeleton: Skeleton, frame: Frame) -> list:
    row = []
    cursor = 0
    for ji, joint in enumerate(skeleton.joints):
        rot_order = "".join(ch[0] for ch in joint.channels if ch.endswith("rotation"))
        if ji == 0:
            eul = np.rad2deg(quat_to_euler(frame.root_orientation, rot_order)) \
                if rot_order else np.empty(0)
        else:
            n_rot = len(rot_order)
            eul = np.rad2deg(frame.joint_angles[cursor:cursor + n_rot])
            cursor += n_rot
        ri = 0
        for ch in joint.channels:
            if ch.endswith("position"):
                row.append(frame.root_position["XYZ".index(ch[0])])
            else:
                row.append(eul[ri])
                ri += 1
    return row


def forward_kinematics(skeleton: Skeleton, frame: Frame):
    """World positions of every joint and end site.

    Returns (joint_positions (J, 3), end_site_positions dict idx -> (3,)).
    """
    J = len(skeleton.joints)
    pos = np.zeros((J, 3))
    quat = np.zeros((J, 4))
    cursor = 0
    for i, joint in enumerate(skeleton.joints):
        rot_order = "".join(ch[0] for ch in joint.channels if ch.endswith("rotation"))
        if i == 0:
            local_q = frame.root_orientation
            local_p = frame.root_position + joint.offset
            pos[i] = local_p
            quat[i] = local_q
        else:
            n_rot = len(rot_order)
            vals = frame.joint_angles[cursor:cursor + n_rot]
            cursor += n_rot
            local_q = euler_to_quat(vals, rot_order) if n_rot else np.array([1.0, 0, 0, 0])
            p_parent = pos[joint.parent]
            q_parent = quat[joint.parent]
            pos[i] = p_parent + quat_rotate(q_parent, joint.offset)
            quat[i] = quat_mul(q_parent, local_q)
    ends = {}
    for idx, off in skeleton.end_sites.items():
        ends[idx] = pos[idx] + quat_rotate(quat[idx], off)
    return pos, ends


def swap_y_up(clip: MotionClip) -> MotionClip:
    """Convert a Y-up capture to the Z-up convention (x, z, -y)."""
    rot = euler_to_quat(np.array([np.pi / 2]), "X")
    frames = []
    for f in clip.frames:
        p = f.root_position
        frames.append(Frame(
            root_position=np.array([p[0], -p[2], p[1]]),
            root_orientation=quat_mul(rot, f.root_orientation),
            joint_angles=f.joint_angles.copy()))
    return MotionClip(id=clip.id, rate_hz=clip.rate_hz, frames=frames,
                      gait_label=clip.gait_label)
