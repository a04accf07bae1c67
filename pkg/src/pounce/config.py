"""Run configuration: a flat registry of dotted keys with documented
defaults. Unknown keys are rejected; the resolved mapping is echoed to
the run directory so reruns are exactly reproducible."""

from __future__ import annotations

import hashlib
import json

# key -> (default, description)
CONFIG_KEYS = {
    "seed": (0, "master rng seed"),
    "workers": (0, "rollout parallelism; 0 = logical cores"),

    "ppo.gamma": (0.95, "discount factor"),
    "ppo.lambda": (0.95, "GAE lambda"),
    "ppo.clip": (0.2, "PPO clip threshold (0.2 stage 1; 0.1 stages 2-3)"),
    "ppo.lr": (1e-5, "policy/value learning rate"),
    "ppo.batch_size": (8192, "samples per learner update"),
    "ppo.epochs": (4, "update epochs per batch"),
    "ppo.minibatches": (8, "minibatches per epoch"),
    "ppo.entropy_coef": (0.0, "entropy bonus coefficient"),
    "ppo.value_coef": (0.5, "value loss coefficient"),

    "vq.codes": (256, "codebook size K"),
    "vq.dim": (32, "code dimension D"),
    "vq.beta": (0.25, "commitment penalty coefficient"),
    "vq.loss_weight": (0.1, "weight of VQ losses inside the PPO objective"),

    "sim.kp": (60.0, "PD position gain"),
    "sim.kd": (1.0, "PD damping gain"),
    "sim.randomize": (True, "domain randomization on/off"),

    "pmc.total_steps": (2_000_000, "stage-1 environment steps"),
    "pmc.n_envs": (32, "parallel environments"),
    "pmc.alpha1": (3.0, "prioritized sampling coefficient"),
    "pmc.stop_at_reward": (0.0, "early stop threshold; 0 disables"),
    "pmc.checkpoint_every": (25, "updates between snapshots"),

    "epmc.scenario": ("flat", "flat|creep|hurdles|blocks|stairs|recovery"),
    "epmc.total_steps": (2_000_000, "stage-2 environment steps"),
    "epmc.n_envs": (32, "parallel environments"),
    "epmc.gail_weight": (1.0, "GAIL reward weight on flat terrain"),
    "epmc.horizon": (10.0, "episode horizon in seconds"),
    "epmc.pmc_checkpoint": ("", "frozen stage-1 checkpoint path"),
    "epmc.from_scratch": (False, "ablation: random primitive instead of frozen"),

    "distill.teachers": ("", "scenario=path list, comma separated"),
    "distill.recovery": ("", "optional recovery teacher checkpoint"),
    "distill.steps": (200_000, "distillation environment steps"),
    "distill.lr": (3e-4, "distillation learning rate"),

    "sepmc.total_steps": (400_000, "stage-3 strategic environment steps"),
    "sepmc.n_envs": (16, "parallel matches"),
    "sepmc.alpha2": (2.0, "PFSP sampling coefficient"),
    "sepmc.snapshot_every": (50, "learner updates between pool snapshots"),
    "sepmc.backend": ("proxy", "proxy|full locomotion backend"),
    "sepmc.epmc_checkpoint": ("", "distilled stage-2 checkpoint for full backend"),

    "paths.out_dir": ("runs", "output directory root"),
    "paths.clips": ("", "directory of planar-clip files; empty = bundled set"),
}


class ConfigError(ValueError):
    pass


class RunConfig:
    def __init__(self, overrides: dict | None = None):
        overrides = dict(overrides or {})
        unknown = set(overrides) - set(CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        self.values = {k: v[0] for k, v in CONFIG_KEYS.items()}
        self.overridden = set(overrides)
        for k, v in overrides.items():
            default = CONFIG_KEYS[k][0]
            if isinstance(default, bool):
                if not isinstance(v, bool):
                    raise ConfigError(f"{k} expects a boolean, got {v!r}")
            elif isinstance(default, (int, float)) and not isinstance(v, (int, float)):
                raise ConfigError(f"{k} expects a number, got {v!r}")
            elif isinstance(default, str) and not isinstance(v, str):
                raise ConfigError(f"{k} expects a string, got {v!r}")
            self.values[k] = v

    def __getitem__(self, key: str):
        return self.values[key]

    def to_json(self) -> str:
        return json.dumps(self.values, sort_keys=True, indent=2) + "\n"

    def hash(self) -> str:
        canon = json.dumps(self.values, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ConfigError("config document must be a JSON object")
        return cls(data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as f:
            return cls.from_json(f.read())
