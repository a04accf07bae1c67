"""Bundled synthetic planar reference clips.

Kinematically consistent trot-style gaits over a speed range, plus
standing, squatting, and exaggerated high-stepping variants. Foot
motion is ground-anchored during stance (no slip relative to the world)
so a physical robot can actually track the references.
"""

from __future__ import annotations

import numpy as np

from ..sim.config import HIP_X, SimConfig
from .planar import PLANAR_RATE, PlanarClip, make_clip
from .retarget import closed_form_ik

# trot: diagonal pairs move together
LEG_PHASE = np.array([0.0, 0.5, 0.5, 0.0])   # FL, FR, HL, HR
KNEE_SIGNS = np.array([-1.0, -1.0, 1.0, 1.0])


def _leg_ik(targets_xz: np.ndarray, cfg: SimConfig) -> np.ndarray:
    """(F, 4, 2) hip-relative toe targets -> (F, 8) joint angles."""
    F = targets_xz.shape[0]
    q = np.empty((F, 8))
    for leg in range(4):
        for f in range(F):
            sol = closed_form_ik(targets_xz[f, leg], cfg.l1, cfg.l2, KNEE_SIGNS[leg])
            q[f, 2 * leg] = sol[0]
            q[f, 2 * leg + 1] = sol[1]
    return q


def stand_clip(duration: float = 4.0, cfg: SimConfig | None = None) -> PlanarClip:
    cfg = cfg or SimConfig()
    n = int(duration * PLANAR_RATE) + 1
    pos = np.zeros((n, 11))
    pos[:, 1] = cfg.standing_root_height
    pos[:, 3:] = cfg.nominal_pose
    return make_clip("stand", pos, gait_label="sit")


def squat_clip(duration: float = 4.0, amplitude: float = 0.05,
               freq: float = 0.5, cfg: SimConfig | None = None) -> PlanarClip:
    """Vertical body oscillation with feet planted under the hips."""
    cfg = cfg or SimConfig()
    n = int(duration * PLANAR_RATE) + 1
    t = np.arange(n) / PLANAR_RATE
    z0 = cfg.standing_root_height
    z = z0 - amplitude * 0.5 * (1.0 - np.cos(2 * np.pi * freq * t))
    targets = np.zeros((n, 4, 2))
    targets[:, :, 0] = 0.0
    targets[:, :, 1] = -z[:, None]
    pos = np.zeros((n, 11))
    pos[:, 1] = z
    pos[:, 3:] = _leg_ik(targets, cfg)
    return make_clip("squat", pos, gait_label="sit")


def walk_clip(speed: float, duration: float = 4.0, lift: float | None = None,
              clip_id: str | None = None, cfg: SimConfig | None = None,
              gait_label: str | None = None) -> PlanarClip:
    """Trot at a constant speed; negative speeds walk backward.

    Stride frequency grows with speed so the stride length stays inside
    the leg workspace; swing-foot trajectories are half-sine lifts with
    smooth fore-aft repositioning; stance feet are world-anchored.
    """
    cfg = cfg or SimConfig()
    pace = abs(speed)
    stride = min(0.30, max(0.16, 0.40 * pace ** 0.5 * 0.5))
    freq = max(1.4, pace / stride)
    stride = speed / freq
    duty = float(np.clip(0.62 - 0.07 * pace, 0.38, 0.62))
    if lift is None:
        lift = float(np.clip(0.05 + 0.02 * pace, 0.05, 0.12))
    z0 = cfg.standing_root_height - 0.005

    n = int(duration * PLANAR_RATE) + 1
    t = np.arange(n) / PLANAR_RATE
    root_x = speed * t

    targets = np.empty((n, 4, 2))
    half = stride / 2.0
    for leg in range(4):
        phase = (t * freq + LEG_PHASE[leg]) % 1.0
        stance = phase < duty
        # stance: foot fixed in the world, so it sweeps backward under the hip
        xs_stance = half - (phase / duty) * stride
        # swing: cosine blend from -half back to +half with a half-sine lift
        sw = (phase - duty) / (1.0 - duty)
        xs_swing = -half + (half - (-half)) * 0.5 * (1 - np.cos(np.pi * sw))
        xs = np.where(stance, xs_stance, xs_swing)
        zs = np.where(stance, -z0, -z0 + lift * np.sin(np.pi * np.clip(sw, 0, 1)))
        targets[:, leg, 0] = xs
        targets[:, leg, 1] = zs

    pos = np.zeros((n, 11))
    pos[:, 0] = root_x
    pos[:, 1] = z0
    pos[:, 3:] = _leg_ik(targets, cfg)
    name = clip_id or (f"walk{speed:.1f}" if speed >= 0 else f"back{-speed:.1f}")
    label = gait_label or ("walk" if pace < 1.6 else "run")
    return make_clip(name, pos, gait_label=label)


def highstep_clip(speed: float = 0.8, duration: float = 4.0,
                  cfg: SimConfig | None = None) -> PlanarClip:
    """Exaggerated-lift walk; the primitive source for clearing obstacles."""
    return walk_clip(speed, duration, lift=0.18, clip_id="highstep",
                     cfg=cfg, gait_label="jump")


def bundled_clips(cfg: SimConfig | None = None,
                  include_reverse: bool = True) -> list:
    """The stock reference set used by training and the acceptance gates.

    Reverse walks cover the planar -x navigation commands the upper
    stages are trained against.
    """
    cfg = cfg or SimConfig()
    clips = [
        stand_clip(cfg=cfg),
        squat_clip(cfg=cfg),
        walk_clip(0.6, cfg=cfg),
        walk_clip(1.2, cfg=cfg),
        walk_clip(1.8, cfg=cfg),
        walk_clip(2.4, cfg=cfg),
        walk_clip(3.0, cfg=cfg),
        highstep_clip(cfg=cfg),
    ]
    if include_reverse:
        clips.extend([
            walk_clip(-0.8, cfg=cfg),
            walk_clip(-1.8, cfg=cfg),
            walk_clip(-2.8, cfg=cfg),
        ])
    return clips
