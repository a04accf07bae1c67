"""Planar quadruped dynamics: PD-actuated rotor-inertia joints on a rigid
torso, penalty ground contact with anchored Coulomb friction, joint
stiction, scheduled root pushes, and inflated edge cylinders.

The engine is vectorized over environments: `BatchState` holds (N, ...)
arrays and `policy_step` advances all environments by one 50 Hz policy
step (10 inner substeps at 500 Hz). The single-robot `step` API wraps a
batch of one.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .config import GRAVITY, HIP_X, N_JOINTS, N_LEGS, SimConfig
from .randomize import RandomizationSpec
from .terrain import TerrainSpec, flat_terrain

STICTION_TORQUE = 5.0        # Nm holding torque below the velocity threshold
KINETIC_FRICTION = 0.2       # Nm opposing motion above it
STICTION_SPEED = 0.05        # rad/s


class SimFault(RuntimeError):
    """Raised when dynamics produce non-finite state."""


@dataclasses.dataclass
class RobotState:
    x: float
    z: float
    pitch: float
    vx: float
    vz: float
    pitch_rate: float
    q: np.ndarray
    qd: np.ndarray
    contacts: np.ndarray
    foot_pos: np.ndarray
    torques: np.ndarray
    anchors: np.ndarray
    torso_contact: bool
    torso_clearance: float
    t: float

    @property
    def gravity_base(self) -> np.ndarray:
        """Unit gravity direction in the base frame, planar (x, z)."""
        return np.array([-np.sin(self.pitch), -np.cos(self.pitch)])

    @property
    def gravity_base3(self) -> np.ndarray:
        """3-vector form (x, y, z) used by reward code."""
        g = self.gravity_base
        return np.array([g[0], 0.0, g[1]])


class BatchState:
    """Structure-of-arrays robot state for N environments."""

    __slots__ = ("root", "root_vel", "q", "qd", "contacts", "foot_pos",
                 "torques", "anchors", "torso_contact", "torso_clearance",
                 "t", "fault")

    def __init__(self, n: int, cfg: SimConfig):
        self.root = np.zeros((n, 3))          # x, z, pitch
        self.root_vel = np.zeros((n, 3))      # vx, vz, pitch rate
        self.q = np.tile(cfg.nominal_pose, (n, 1))
        self.qd = np.zeros((n, N_JOINTS))
        self.contacts = np.zeros((n, N_LEGS), dtype=bool)
        self.foot_pos = np.zeros((n, N_LEGS, 2))
        self.torques = np.zeros((n, N_JOINTS))
        self.anchors = np.full((n, N_LEGS), np.nan)
        self.torso_contact = np.zeros(n, dtype=bool)
        self.torso_clearance = np.zeros(n)
        self.t = np.zeros(n)
        self.fault = np.zeros(n, dtype=bool)

    @property
    def n(self) -> int:
        return self.root.shape[0]

    def copy(self) -> "BatchState":
        out = BatchState.__new__(BatchState)
        for name in self.__slots__:
            setattr(out, name, getattr(self, name).copy())
        return out

    def state(self, i: int) -> RobotState:
        return RobotState(
            x=float(self.root[i, 0]), z=float(self.root[i, 1]),
            pitch=float(self.root[i, 2]),
            vx=float(self.root_vel[i, 0]), vz=float(self.root_vel[i, 1]),
            pitch_rate=float(self.root_vel[i, 2]),
            q=self.q[i].copy(), qd=self.qd[i].copy(),
            contacts=self.contacts[i].copy(), foot_pos=self.foot_pos[i].copy(),
            torques=self.torques[i].copy(), anchors=self.anchors[i].copy(),
            torso_contact=bool(self.torso_contact[i]),
            torso_clearance=float(self.torso_clearance[i]),
            t=float(self.t[i]))

    def set_state(self, i: int, s: RobotState):
        self.root[i] = (s.x, s.z, s.pitch)
        self.root_vel[i] = (s.vx, s.vz, s.pitch_rate)
        self.q[i] = s.q
        self.qd[i] = s.qd
        self.contacts[i] = s.contacts
        self.foot_pos[i] = s.foot_pos
        self.torques[i] = s.torques
        self.anchors[i] = s.anchors
        self.torso_contact[i] = s.torso_contact
        self.torso_clearance[i] = s.torso_clearance
        self.t[i] = s.t


def pd_torque(q, qd, q_target, kp, kd, limit):
    """tau = clamp(Kp (q* - q) - Kd qd, +/- limit); accepts arrays."""
    tau = kp * (np.asarray(q_target) - np.asarray(q)) - kd * np.asarray(qd)
    return np.clip(tau, -np.asarray(limit), np.asarray(limit))


def joint_limits(cfg: SimConfig):
    lo = np.empty(N_JOINTS)
    hi = np.empty(N_JOINTS)
    for leg in range(N_LEGS):
        lo[2 * leg], hi[2 * leg] = cfg.hip_limits
        if leg < 2:   # front knees bend backward
            lo[2 * leg + 1], hi[2 * leg + 1] = cfg.knee_limits
        else:         # hind knees mirrored
            lo[2 * leg + 1], hi[2 * leg + 1] = -cfg.knee_limits[1], -cfg.knee_limits[0]
    return lo, hi


def leg_geometry(root: np.ndarray, q: np.ndarray, cfg: SimConfig):
    """Foot world positions and world Jacobians for all legs.

    Returns (feet_w (N,4,2), J_w (N,4,2,2), offsets (N,4,2)) where
    offsets are foot positions relative to the root in world frame and
    J_w[..., comp, joint] maps (hip, knee) rates to world velocity.
    """
    th = root[:, 2]
    c, s = np.cos(th)[:, None], np.sin(th)[:, None]
    qh = q[:, 0::2]
    qk = q[:, 1::2]
    a1 = qh
    a2 = qh + qk
    # base-frame foot position
    bx = HIP_X[None, :] + cfg.l1 * np.sin(a1) + cfg.l2 * np.sin(a2)
    bz = -cfg.l1 * np.cos(a1) - cfg.l2 * np.cos(a2)
    ox = c * bx - s * bz
    oz = s * bx + c * bz
    feet = np.stack([root[:, 0:1] + ox, root[:, 1:2] + oz], axis=-1)
    offsets = np.stack([ox, oz], axis=-1)
    # base-frame Jacobian columns
    jx_h = cfg.l1 * np.cos(a1) + cfg.l2 * np.cos(a2)
    jz_h = cfg.l1 * np.sin(a1) + cfg.l2 * np.sin(a2)
    jx_k = cfg.l2 * np.cos(a2)
    jz_k = cfg.l2 * np.sin(a2)
    J = np.empty(q.shape[:1] + (N_LEGS, 2, 2))
    J[:, :, 0, 0] = c * jx_h - s * jz_h
    J[:, :, 1, 0] = s * jx_h + c * jz_h
    J[:, :, 0, 1] = c * jx_k - s * jz_k
    J[:, :, 1, 1] = s * jx_k + c * jz_k
    return feet, J, offsets


def torso_points(root: np.ndarray, cfg: SimConfig):
    """World positions of the torso box corners (N, 4, 2): bottom pair
    then top pair, front first."""
    hx, hz = cfg.torso_length / 2.0, cfg.torso_height / 2.0
    base = np.array([[hx, -hz], [-hx, -hz], [hx, hz], [-hx, hz]])
    th = root[:, 2]
    c, s = np.cos(th)[:, None], np.sin(th)[:, None]
    wx = c * base[None, :, 0] - s * base[None, :, 1]
    wz = s * base[None, :, 0] + c * base[None, :, 1]
    return np.stack([root[:, 0:1] + wx, root[:, 1:2] + wz], axis=-1)


def _substep(bs: BatchState, targets: np.ndarray, terrains, cfg: SimConfig,
             limits, torque_caps, frictions, push_fx, push_fz,
             push_period, push_duration):
    n = bs.n
    dt = cfg.dt
    lo, hi = limits

    tau_pd = pd_torque(bs.q, bs.qd, targets, cfg.kp, cfg.kd, torque_caps[:, None])
    bs.torques = tau_pd

    feet, J, offsets = leg_geometry(bs.root, bs.q, cfg)
    # foot world velocity: root + rotational + articulation
    qd_leg = bs.qd.reshape(n, N_LEGS, 2)
    v_art = np.einsum("nlcj,nlj->nlc", J, qd_leg)
    perp = np.stack([-offsets[:, :, 1], offsets[:, :, 0]], axis=-1)
    v_feet = bs.root_vel[:, None, 0:2] + bs.root_vel[:, 2][:, None, None] * perp + v_art

    # ground heights under feet and torso points
    tp = torso_points(bs.root, cfg)
    ground_feet = np.empty((n, N_LEGS))
    ground_torso = np.empty((n, 4))
    ground_root = np.empty(n)
    simple = all(t.xs.size == 0 for t in terrains)
    if simple:
        ground_feet[:] = 0.0
        ground_torso[:] = 0.0
        ground_root[:] = 0.0
    else:
        for i, t in enumerate(terrains):
            qs = np.concatenate([feet[i, :, 0], tp[i, :, 0], bs.root[i, 0:1]])
            hs = t.height(qs)
            ground_feet[i] = hs[:N_LEGS]
            ground_torso[i] = hs[N_LEGS:N_LEGS + 4]
            ground_root[i] = hs[-1]

    # --- foot ground contact -------------------------------------------------
    pen = ground_feet - feet[:, :, 1]
    active = pen > 0.0
    fz = np.where(active, cfg.contact_k * pen - cfg.contact_c * v_feet[:, :, 1], 0.0)
    fz = np.clip(fz, 0.0, cfg.contact_force_cap)
    # tangential anchor springs
    fresh = active & np.isnan(bs.anchors)
    bs.anchors = np.where(fresh, feet[:, :, 0], bs.anchors)
    anchor = np.where(active, bs.anchors, feet[:, :, 0])
    ft_raw = -cfg.friction_k * (feet[:, :, 0] - anchor) - cfg.friction_c * v_feet[:, :, 0]
    cone = frictions[:, None] * fz
    ft = np.clip(ft_raw, -cone, cone)
    slid = active & (np.abs(ft_raw) > cone)
    # slide the anchor so the spring matches the cone force
    bs.anchors = np.where(
        slid, feet[:, :, 0] + (ft + cfg.friction_c * v_feet[:, :, 0]) / cfg.friction_k,
        bs.anchors)
    bs.anchors = np.where(active, bs.anchors, np.nan)
    ft = np.where(active, ft, 0.0)

    foot_force = np.stack([ft, fz], axis=-1)

    # --- edge cylinders (feet only) -------------------------------------------
    for i, t in enumerate(terrains):
        if t.edges.size == 0:
            continue
        e = t.edges
        d = feet[i, :, None, :] - e[None, :, 0:2]          # (4, E, 2)
        dist = np.sqrt((d * d).sum(axis=-1))
        hit = dist < e[None, :, 2]
        if not hit.any():
            continue
        safe = np.maximum(dist, 1e-9)
        push = cfg.contact_k * (e[None, :, 2] - dist) * hit
        foot_force[i] += (d / safe[:, :, None] * push[:, :, None]).sum(axis=1)

    # --- torso contacts --------------------------------------------------------
    torso_force = np.zeros((n, 2))
    torso_torque = np.zeros(n)
    tp_off = tp - bs.root[:, None, 0:2]
    tp_perp = np.stack([-tp_off[:, :, 1], tp_off[:, :, 0]], axis=-1)
    v_tp = bs.root_vel[:, None, 0:2] + bs.root_vel[:, 2][:, None, None] * tp_perp
    pen_t = ground_torso - tp[:, :, 1]
    act_t = pen_t > 0.0
    fz_t = np.clip(np.where(act_t, cfg.contact_k * pen_t - cfg.contact_c * v_tp[:, :, 1], 0.0),
                   0.0, cfg.contact_force_cap)
    ft_t = np.clip(-cfg.friction_c * v_tp[:, :, 0] * act_t,
                   -frictions[:, None] * fz_t, frictions[:, None] * fz_t)
    bs.torso_contact = act_t[:, :2].any(axis=1)
    torso_force[:, 0] += ft_t.sum(axis=1)
    torso_force[:, 1] += fz_t.sum(axis=1)
    torso_torque += (tp_off[:, :, 0] * fz_t - tp_off[:, :, 1] * ft_t).sum(axis=1)

    # creep bars push the torso top down
    for i, t in enumerate(terrains):
        if t.bars.size == 0:
            continue
        clear = t.clearance(tp[i, 2:, 0])
        pen_b = tp[i, 2:, 1] - clear
        mask = pen_b > 0.0
        if not mask.any():
            continue
        f = -np.clip(cfg.contact_k * pen_b + cfg.contact_c * np.maximum(v_tp[i, 2:, 1], 0.0),
                     0.0, cfg.contact_force_cap) * mask
        torso_force[i, 1] += f.sum()
        torso_torque[i] += (tp_off[i, 2:, 0] * f).sum()

    # --- aggregate torso wrench -------------------------------------------------
    torso_force += foot_force.sum(axis=1)
    torso_torque += (offsets[:, :, 0] * foot_force[:, :, 1]
                     - offsets[:, :, 1] * foot_force[:, :, 0]).sum(axis=1)
    pushing = (bs.t % push_period) < push_duration
    torso_force[:, 0] += push_fx * pushing
    torso_force[:, 1] += push_fz * pushing

    # --- joint dynamics with stiction ---------------------------------------------
    tau_contact = np.einsum("nlcj,nlc->nlj", J, foot_force).reshape(n, N_JOINTS)
    tau_net = tau_pd + tau_contact
    slow = np.abs(bs.qd) < STICTION_SPEED
    hold = slow & (np.abs(tau_net) <= STICTION_TORQUE)
    excess = tau_net - np.clip(tau_net, -STICTION_TORQUE, STICTION_TORQUE)
    tau_eff = np.where(slow, excess, tau_net - np.sign(bs.qd) * KINETIC_FRICTION)
    qdd = np.where(hold, 0.0, tau_eff / cfg.rotor_inertia)
    bs.qd = np.where(hold, 0.0, bs.qd + dt * qdd)
    bs.q = bs.q + dt * bs.qd
    below, above = bs.q < lo, bs.q > hi
    bs.q = np.clip(bs.q, lo, hi)
    bs.qd = np.where((below & (bs.qd < 0)) | (above & (bs.qd > 0)), 0.0, bs.qd)

    # --- torso integration ----------------------------------------------------------
    acc = torso_force / cfg.torso_mass
    acc[:, 1] -= GRAVITY
    bs.root_vel[:, 0:2] += dt * acc
    bs.root_vel[:, 2] += dt * torso_torque / cfg.torso_inertia
    bs.root[:, 0:2] += dt * bs.root_vel[:, 0:2]
    bs.root[:, 2] += dt * bs.root_vel[:, 2]
    bs.t += dt

    bs.contacts = active
    bs.foot_pos = feet
    bs.torso_clearance = bs.root[:, 1] - ground_root


def policy_step(bs: BatchState, actions: np.ndarray, terrains, rands,
                cfg: SimConfig, limits=None):
    """Advance every environment by one 50 Hz policy step in place."""
    if limits is None:
        limits = joint_limits(cfg)
    actions = np.clip(np.asarray(actions, dtype=np.float64),
                      -cfg.residual_bound, cfg.residual_bound)
    targets = np.clip(bs.q + actions, limits[0], limits[1])
    torque_caps = np.array([r.torque_limit for r in rands])
    frictions = np.array([r.friction for r in rands])
    push_fx = np.array([r.push_fx for r in rands])
    push_fz = np.array([r.push_fz for r in rands])
    push_period = np.array([r.push_period for r in rands])
    push_duration = np.array([r.push_duration for r in rands])
    for _ in range(cfg.substeps):
        _substep(bs, targets, terrains, cfg, limits,
                 torque_caps, frictions, push_fx, push_fz,
                 push_period, push_duration)
    bad = ~(np.isfinite(bs.root).all(axis=1) & np.isfinite(bs.q).all(axis=1)
            & np.isfinite(bs.root_vel).all(axis=1) & np.isfinite(bs.qd).all(axis=1))
    bs.fault |= bad


def step(state: RobotState, action: np.ndarray, terrain: TerrainSpec,
         rand: RandomizationSpec, cfg: SimConfig) -> RobotState:
    """Single-robot policy step; raises SimFault on non-finite dynamics."""
    bs = BatchState(1, cfg)
    bs.set_state(0, state)
    policy_step(bs, np.asarray(action)[None, :], [terrain], [rand], cfg)
    if bs.fault[0]:
        raise SimFault("non-finite state after step")
    return bs.state(0)


def is_fallen(state: RobotState) -> bool:
    """Tipped past ~72 degrees, or torso low and in ground contact."""
    if state.gravity_base3[2] > -0.3:
        return True
    return state.torso_clearance < 0.12 and state.torso_contact


def fallen_mask(bs: BatchState) -> np.ndarray:
    tipped = -np.cos(bs.root[:, 2]) > -0.3
    low = (bs.torso_clearance < 0.12) & bs.torso_contact
    return tipped | low


def standing_state(cfg: SimConfig, terrain: TerrainSpec | None = None,
                   x: float = 0.0, settle: float = 1.0) -> RobotState:
    """Quiet-standing equilibrium at x, settled dynamically then stilled."""
    if terrain is None:
        terrain = flat_terrain()
    bs = BatchState(1, cfg)
    ground = float(terrain.height(np.array([x]))[0])
    bs.root[0] = (x, ground + cfg.standing_root_height, 0.0)
    rand = RandomizationSpec(push_fx=0.0, push_fz=0.0)
    zero = np.zeros((1, N_JOINTS))
    for _ in range(int(settle / cfg.policy_dt)):
        policy_step(bs, zero, [terrain], [rand], cfg)
    bs.root_vel[:] = 0.0
    bs.qd[:] = 0.0
    bs.t[:] = 0.0
    return bs.state(0)


def total_energy(bs: BatchState, cfg: SimConfig) -> np.ndarray:
    """Kinetic + gravitational energy (contact springs excluded)."""
    v2 = (bs.root_vel[:, 0:2] ** 2).sum(axis=1)
    return (0.5 * cfg.torso_mass * v2
            + 0.5 * cfg.torso_inertia * bs.root_vel[:, 2] ** 2
            + 0.5 * cfg.rotor_inertia * (bs.qd ** 2).sum(axis=1)
            + cfg.torso_mass * GRAVITY * bs.root[:, 1])
