"""Locomotion warm start for environmental-level networks.

Desk-scale PPO cannot discover coherent 50 Hz code sequences from a
uniform categorical within the training budgets, so scenario policies
start from a behavior-cloned selector: the frozen stage-1 encoder,
driven by a command-conditioned virtual reference gait, provides target
codes along the student's own rollouts. PPO then optimizes the real
scenario rewards from this initialization.
"""

from __future__ import annotations

import numpy as np

from ..motion.planar import PlanarClip, frame_at
from ..motion.synthetic import walk_clip
from ..nn import Adam, CategoricalHead, Tensor, no_grad
from ..pmc.obs import FUTURE_HORIZONS, N_JOINTS
from ..pmc.policy import PmcPolicy
from .env import EpmcEnv
from .policy import EpmcPolicy

SPEED_GRID = 0.1


class VirtualReference:
    """Periodic reference gait matching a signed speed command; future
    targets are expressed as desired progress, not absolute positions,
    so they never drift from the robot.

    An optional calibration (reference speed -> realized speed under the
    frozen primitive) is inverted so commands land on the realized speed.
    """

    def __init__(self, calibration: tuple | None = None):
        self.cache = {}
        if calibration is not None:
            refs, realized = np.asarray(calibration[0]), np.asarray(calibration[1])
            order = np.argsort(realized)
            self.cal_realized = realized[order]
            self.cal_refs = refs[order]
        else:
            self.cal_realized = None

    def _reference_speed(self, signed_speed: float) -> float:
        if self.cal_realized is None:
            return signed_speed
        return float(np.interp(signed_speed, self.cal_realized, self.cal_refs))

    def clip_for(self, signed_speed: float) -> tuple:
        target = self._reference_speed(signed_speed)
        key = round(target / SPEED_GRID) * SPEED_GRID
        if abs(key) < 0.3:
            key = 0.3 if key >= 0 else -0.3
        if key not in self.cache:
            self.cache[key] = walk_clip(key, duration=4.0)
        return self.cache[key], key

    def future(self, signed_speed: float, tau: float, robot_z: float,
               robot_pitch: float) -> tuple:
        clip, ref_speed = self.clip_for(signed_speed)
        span = clip.duration - 1.2     # keep the 1 s horizon in range
        tau = tau % span
        out = np.empty(len(FUTURE_HORIZONS) * (N_JOINTS + 3))
        k = 0
        for h in FUTURE_HORIZONS:
            ref = frame_at(clip, tau + h)
            out[k:k + N_JOINTS] = ref.q
            out[k + N_JOINTS] = ref_speed * h
            out[k + N_JOINTS + 1] = ref.z - robot_z
            out[k + N_JOINTS + 2] = ref.pitch - robot_pitch
            k += N_JOINTS + 3
        return out, tau


def oracle_codes(pmc: PmcPolicy, proprio: np.ndarray,
                 future: np.ndarray) -> np.ndarray:
    import pounce.vq as vqmod
    with no_grad():
        z_e = pmc.encoder(Tensor(np.concatenate([proprio, future], axis=1)))
    idx, _ = vqmod.quantize(z_e.data, pmc.codebook, count_usage=False)
    return idx


CALIBRATION_SPEEDS = (0.5, 0.65, 0.8, 0.95, 1.1, 1.25, 1.4, 1.55, 1.7, 1.85,
                      2.0, 2.15, 2.3, 2.45, 2.6, 2.75, 2.9, 3.05, 3.2,
                      -0.5, -0.7, -0.9, -1.15, -1.4, -1.65, -1.9, -2.15,
                      -2.4, -2.65, -2.9, -3.2)


def calibrate_reference(pmc: PmcPolicy, sim_cfg=None,
                        speeds=CALIBRATION_SPEEDS,
                        settle: float = 1.5, window: float = 3.5) -> tuple:
    """Realized steady-state speed under the primitive for each reference
    gait speed; feeds VirtualReference's inverse lookup."""
    from ..pmc.obs import ProprioBuffer, per_step_state
    from ..sim.config import SimConfig
    from ..sim.engine import BatchState, policy_step, standing_state
    from ..sim.randomize import evaluation_randomization
    from ..sim.terrain import flat_terrain

    cfg = sim_cfg or SimConfig()
    terrain = flat_terrain()
    rand = evaluation_randomization()
    stand = standing_state(cfg)
    ref = VirtualReference()
    n = len(speeds)
    bs = BatchState(n, cfg)
    for i in range(n):
        bs.set_state(i, stand)
    buf = ProprioBuffer(n)
    rows = per_step_state(bs.root, bs.root_vel, bs.q, bs.qd)
    for i in range(n):
        buf.reset(i, rows[i])
    taus = np.zeros(n)
    vx_acc = np.zeros(n)
    count = 0
    total_steps = int((settle + window) / cfg.policy_dt)
    settle_steps = int(settle / cfg.policy_dt)
    for step in range(total_steps):
        proprio = buf.proprio()
        fut = np.empty((n, 44))
        for i in range(n):
            fut[i], taus[i] = ref.future(speeds[i], taus[i],
                                         bs.root[i, 1], bs.root[i, 2])
        codes = oracle_codes(pmc, proprio, fut)
        with no_grad():
            z_q = pmc.codebook.embeddings.data[codes]
            motor = pmc.decoder(Tensor(np.concatenate([proprio, z_q],
                                                      axis=1))).data
        policy_step(bs, motor, [terrain] * n, [rand] * n, cfg)
        buf.push_actions(motor)
        buf.push_state(per_step_state(bs.root, bs.root_vel, bs.q, bs.qd))
        taus += cfg.policy_dt
        if step >= settle_steps:
            vx_acc += bs.root_vel[:, 0]
            count += 1
    realized = vx_acc / count
    return np.asarray(speeds, dtype=np.float64), realized


def warmstart(policy: EpmcPolicy, steps: int = 60_000, n_envs: int = 32,
              seed: int = 0, lr: float = 1e-3, sim_cfg=None,
              log_progress=None, epochs: int = 3, window: int = 32) -> int:
    """Behavior-clone the code head onto the oracle selector over a flat
    command-following rollout. Returns environment steps consumed (they
    count against the caller's training budget).

    Rollout actions anneal from oracle-driven to student-driven (DAgger
    style) while labels always come from the oracle, so the student sees
    its own state distribution with recovery supervision.
    """
    rng = np.random.default_rng(seed)
    env = EpmcEnv("flat", n_envs, seed=seed + 1, cfg=sim_cfg)
    pmc = policy.pmc
    ref = VirtualReference(calibrate_reference(pmc, sim_cfg))
    taus = np.zeros(n_envs)
    speed_integral = np.zeros(n_envs)
    h, c = policy.initial_state(n_envs)
    trainable = {n: p for n, p in policy.named_parameters()
                 if not n.startswith("pmc/") and not n.startswith("epmc/value/")
                 and not n.startswith("epmc/res_")}
    opt = Adam(trainable, lr=lr)
    used = 0
    batch_obs, batch_codes = [], []
    losses = []
    while used < steps:
        obs = env.observe()
        future = np.empty((n_envs, 44))
        for i in range(n_envs):
            signed = env.command_dir[i] * env.command_speed[i]
            # slow integral trim; the student's LSTM can realize the same
            # feedback from its own speed-error history
            err = signed - env.bs.root_vel[i, 0]
            speed_integral[i] = np.clip(
                speed_integral[i] + 1.5 * err * env.cfg.policy_dt, -0.6, 0.6)
            future[i], taus[i] = ref.future(signed + speed_integral[i], taus[i],
                                            env.bs.root[i, 1], env.bs.root[i, 2])
        codes = oracle_codes(pmc, obs["proprio"], future)
        obs_s = dict(obs)
        obs_s["h"], obs_s["c"] = h.copy(), c.copy()
        batch_obs.append(obs_s)
        batch_codes.append(codes.copy())
        # anneal from teacher forcing to the student's own code choices
        p_student = min(0.7, used / max(steps, 1))
        with no_grad():
            h_t, c_t = policy._trunk(obs_s, h, c)
            student_codes = CategoricalHead(policy.code_head(h_t)).sample(rng)
        take_student = rng.random(n_envs) < p_student
        exec_codes = np.where(take_student, student_codes, codes)
        motor = policy.decode_action(obs["proprio"], exec_codes)
        h, c = h_t.data, c_t.data
        _, done, _, infos = env.step(motor)
        taus += env.cfg.policy_dt
        for info in infos:
            i = info["env"]
            h[i] = 0.0
            c[i] = 0.0
            taus[i] = 0.0
            speed_integral[i] = 0.0
        used += n_envs
        if len(batch_obs) >= window:
            for _ in range(epochs):
                order = rng.permutation(len(batch_obs))
                for k in order:
                    ob = batch_obs[k]
                    h_new, _ = policy._trunk(ob, ob["h"], ob["c"])
                    head = CategoricalHead(policy.code_head(h_new))
                    loss = -head.log_prob(batch_codes[k]).mean()
                    opt.zero_grad()
                    loss.backward()
                    opt.step(max_grad_norm=1.0)
                    losses.append(float(loss.data))
            batch_obs, batch_codes = [], []
            if log_progress:
                log_progress({"warmstart_steps": used,
                              "clone_loss": float(np.mean(losses[-window:]))})
    return used
