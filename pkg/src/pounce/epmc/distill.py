"""Multi-expert distillation: compress per-scenario teachers into one
uniform environmental-level network.

Trajectories come from the student (on-policy); the loss is the KL from
the student's code distribution to the active teacher's, plus a squared
error on the residual head (target zero where the teacher has none).
A fallen state switches the supervision target to the recovery teacher.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from ..nn import Adam, CategoricalHead, GaussianHead, Tensor
from ..sim.config import N_JOINTS, SimConfig
from ..sim.engine import fallen_mask
from .env import EpmcEnv
from .policy import EpmcPolicy


@dataclasses.dataclass
class DistillConfig:
    total_steps: int = 200_000
    n_envs: int = 16
    seed: int = 0
    lr: float = 3e-4
    batch_size: int = 2048
    minibatch: int = 256
    residual_weight: float = 1.0


def kl_categorical(student_log_probs: Tensor, teacher_log_probs: np.ndarray) -> Tensor:
    """KL(student || teacher) per row, differentiable in the student."""
    p = student_log_probs.exp()
    return (p * (student_log_probs - Tensor(teacher_log_probs))).sum(axis=-1)


def kl_value(student_log_probs: np.ndarray, teacher_log_probs: np.ndarray) -> np.ndarray:
    p = np.exp(student_log_probs)
    return (p * (student_log_probs - teacher_log_probs)).sum(axis=-1)


class TeacherSet:
    """Per-scenario frozen teachers plus the optional recovery teacher."""

    def __init__(self, teachers: dict, recovery: EpmcPolicy | None = None):
        if not teachers:
            raise ValueError("at least one scenario teacher is required")
        self.teachers = dict(teachers)
        self.recovery = recovery
        self.states = {}

    def scenarios(self):
        return sorted(self.teachers)

    def select(self, scenario: str, fallen: bool) -> EpmcPolicy:
        """Supervision target: the recovery policy on fallen states when
        available, else the scenario teacher."""
        if fallen and self.recovery is not None:
            return self.recovery
        if scenario not in self.teachers:
            raise KeyError(f"no teacher for scenario {scenario!r}")
        return self.teachers[scenario]


def distill(teacher_set: TeacherSet, student: EpmcPolicy, cfg: DistillConfig,
            sim_cfg: SimConfig | None = None, log_progress=None):
    """Returns (student, history). The student must carry a residual head
    so stair teachers can be matched (zero targets elsewhere)."""
    if not student.residual_head:
        raise ValueError("uniform student needs a residual head")
    rng = np.random.default_rng(cfg.seed)
    scenarios = teacher_set.scenarios()
    envs = {s: EpmcEnv(s, cfg.n_envs, seed=cfg.seed + 7 + i, cfg=sim_cfg)
            for i, s in enumerate(scenarios)}
    hidden = {s: list(student.initial_state(cfg.n_envs)) for s in scenarios}
    t_hidden = {s: list(student.initial_state(cfg.n_envs)) for s in scenarios}
    trainable = {n: p for n, p in student.named_parameters()
                 if not n.startswith("pmc/") and not n.startswith("epmc/value/")}
    opt = Adam(trainable, lr=cfg.lr)
    history = []
    step = 0
    while step < cfg.total_steps:
        rows = {"obs": [], "teacher_lp": [], "teacher_res": []}
        per_iter = max(1, cfg.batch_size // (cfg.n_envs * len(scenarios)))
        for s in scenarios:
            env = envs[s]
            h, c = hidden[s]
            th, tc = t_hidden[s]
            teacher = teacher_set.teachers[s]
            for _ in range(per_iter):
                obs = env.observe()
                fallen = fallen_mask(env.bs)
                # scenario teacher on the full batch; recovery overrides
                # the fallen rows when a recovery teacher exists
                t_lp, t_res_full, (th_new, tc_new) = \
                    teacher.code_distribution(obs, th, tc)
                t_res = t_res_full if teacher.residual_head \
                    else np.zeros((cfg.n_envs, N_JOINTS))
                if teacher_set.recovery is not None and fallen.any():
                    sel = np.flatnonzero(fallen)
                    sub = {k: np.asarray(v)[sel] for k, v in obs.items()}
                    r_lp, r_res, _ = teacher_set.recovery.code_distribution(
                        sub, th[sel], tc[sel])
                    t_lp = t_lp.copy()
                    t_lp[sel] = r_lp
                    if r_res is not None:
                        t_res = np.array(t_res)
                        t_res[sel] = r_res
                obs_s = dict(obs)
                obs_s["h"], obs_s["c"] = h.copy(), c.copy()
                rows["obs"].append(obs_s)
                rows["teacher_lp"].append(t_lp)
                rows["teacher_res"].append(np.asarray(t_res))
                idx, residual, _, _, motor, (h, c) = student.act(obs, h, c, rng)
                th, tc = th_new, tc_new
                _, done, _, infos = env.step(motor)
                for info in infos:
                    i = info["env"]
                    h[i] = 0.0
                    c[i] = 0.0
                    th[i] = 0.0
                    tc[i] = 0.0
                step += cfg.n_envs
            hidden[s] = [h, c]
            t_hidden[s] = [th, tc]
        # supervised update over the fresh batch
        losses = []
        order = rng.permutation(len(rows["obs"]))
        for k in order:
            obs = rows["obs"][k]
            h_new, _ = student._trunk(obs, obs["h"], obs["c"])
            head = CategoricalHead(student.code_head(h_new))
            kl = kl_categorical(head.log_probs, rows["teacher_lp"][k]).mean()
            res_mean = student.res_head(h_new)
            res_err = (res_mean - Tensor(rows["teacher_res"][k])).square() \
                .sum(axis=-1).mean()
            loss = kl + cfg.residual_weight * res_err
            opt.zero_grad()
            loss.backward()
            opt.step(max_grad_norm=1.0)
            losses.append(float(kl.data))
        history.append({"step": step, "mean_kl": float(np.mean(losses))})
        if log_progress:
            log_progress(history[-1])
    return student, history


def heldout_kl(teacher_set: TeacherSet, student: EpmcPolicy, scenario: str,
               n_states: int = 500, seed: int = 1234,
               sim_cfg: SimConfig | None = None) -> float:
    """Mean KL(student || active teacher) over fresh student-visited states."""
    rng = np.random.default_rng(seed)
    env = EpmcEnv(scenario, 8, seed=seed, cfg=sim_cfg)
    h, c = student.initial_state(8)
    th, tc = student.initial_state(8)
    teacher = teacher_set.teachers[scenario]
    kls = []
    while len(kls) * 8 < n_states:
        obs = env.observe()
        s_lp, _, _ = student.code_distribution(obs, h, c)
        t_lp, _, _ = teacher.code_distribution(obs, th, tc)
        kls.append(kl_value(s_lp, t_lp).mean())
        idx, residual, _, _, motor, (h, c) = student.act(obs, h, c, rng)
        _, _, (th, tc) = teacher.code_distribution(obs, th, tc)
        _, done, _, infos = env.step(motor)
        for info in infos:
            i = info["env"]
            h[i] = 0.0
            c[i] = 0.0
            th[i] = 0.0
            tc[i] = 0.0
    return float(np.mean(kls))
