"""Environmental-level network: exteroception through conv stacks,
proprioception and command through a dense branch, fused into an LSTM
that emits a categorical code for the frozen primitive decoder plus an
optional residual joint-offset head."""

from __future__ import annotations

import numpy as np

from ..nn import (CategoricalHead, Conv1d, Conv2d, GaussianHead, LSTMCell,
                  Linear, MLP, Tensor, concat, no_grad)
from ..pmc.obs import PROPRIO_DIM
from ..pmc.policy import PmcPolicy
from ..sim.config import N_JOINTS
from ..sim.sensors import DEPTH_RANGE, RAY_CAP

COMMAND_DIM = 3                # direction x, direction y (0 in plane), speed
LSTM_HIDDEN = 32
N_CODES = 256
RESIDUAL_BOUND = 0.3
VALUE_RAY_STRIDE = 8


class EpmcPolicy:
    def __init__(self, rng: np.random.Generator, pmc: PmcPolicy,
                 residual_head: bool = False):
        self.pmc = pmc
        self.residual_head = residual_head
        self.grid_convs_h = _grid_stack(rng)
        self.grid_convs_d = _grid_stack(rng)
        self.ray_convs = [Conv1d(rng, 1, 4, 4, cyclic=True),
                          Conv1d(rng, 4, 4, 4, stride=2),
                          Conv1d(rng, 4, 4, 4, stride=2),
                          Conv1d(rng, 4, 1, 4, stride=2)]
        self.proprio_net = MLP(rng, PROPRIO_DIM + COMMAND_DIM, [256], 128,
                               out_gain=1.0, out_activation="tanh")
        grid_dim = 2 * _grid_out_dim()
        ray_dim = 14
        self.fuse = Linear(rng, 128 + grid_dim + ray_dim, 256)
        self.lstm = LSTMCell(rng, 256, LSTM_HIDDEN)
        self.code_head = Linear(rng, LSTM_HIDDEN, N_CODES, gain=0.01)
        if pmc.codebook.usage.sum() > 0:
            # seed the categorical with the primitive's code prior so early
            # rollouts favor codes the decoder was actually trained on
            p = pmc.codebook.usage / pmc.codebook.usage.sum()
            self.code_head.b.data = np.log(0.75 * p + 0.25 / N_CODES)
        if residual_head:
            self.res_head = Linear(rng, LSTM_HIDDEN, N_JOINTS, gain=0.01)
            self.res_log_std = Tensor(np.full(N_JOINTS, np.log(0.05)),
                                      requires_grad=True)
        value_in = PROPRIO_DIM + COMMAND_DIM + 25 + 25 + 128 // VALUE_RAY_STRIDE
        self.value = MLP(rng, value_in, [256, 256], 1, out_gain=1.0)
        self.frozen_prefixes = ("pmc/",)

    # -- parameters ------------------------------------------------------------

    def named_parameters(self):
        yield from self.pmc.named_parameters()
        for i, conv in enumerate(self.grid_convs_h):
            for n, p in conv.named_parameters():
                yield f"epmc/gridh.{i}/{n}", p
        for i, conv in enumerate(self.grid_convs_d):
            for n, p in conv.named_parameters():
                yield f"epmc/gridd.{i}/{n}", p
        for i, conv in enumerate(self.ray_convs):
            for n, p in conv.named_parameters():
                yield f"epmc/rays.{i}/{n}", p
        for n, p in self.proprio_net.named_parameters():
            yield f"epmc/proprio/{n}", p
        for n, p in self.fuse.named_parameters():
            yield f"epmc/fuse/{n}", p
        for n, p in self.lstm.named_parameters():
            yield f"epmc/lstm/{n}", p
        for n, p in self.code_head.named_parameters():
            yield f"epmc/code_head/{n}", p
        if self.residual_head:
            for n, p in self.res_head.named_parameters():
                yield f"epmc/res_head/{n}", p
            yield "epmc/res_log_std", self.res_log_std
        for n, p in self.value.named_parameters():
            yield f"epmc/value/{n}", p

    def state_arrays(self):
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_arrays(self, arrays, strict: bool = True):
        for name, p in self.named_parameters():
            if name not in arrays:
                if strict:
                    raise KeyError(name)
                continue
            src = np.asarray(arrays[name], dtype=np.float64)
            if src.shape != p.data.shape:
                raise ValueError(f"shape mismatch for {name}")
            p.data = src.copy()

    def initial_state(self, batch: int):
        return self.lstm.initial_state(batch)

    # -- forward ------------------------------------------------------------------

    def _trunk(self, obs: dict, h, c):
        gh = Tensor(obs["height_grid"][:, None, :, :])
        for conv in self.grid_convs_h:
            gh = conv(gh).relu()
        gd = Tensor(obs["depth_grid"][:, None, :, :] / DEPTH_RANGE)
        for conv in self.grid_convs_d:
            gd = conv(gd).relu()
        rays = Tensor(obs["rays"][:, None, :] / RAY_CAP)
        for conv in self.ray_convs:
            rays = conv(rays).relu()
        n = obs["rays"].shape[0]
        prop = self.proprio_net(Tensor(
            np.concatenate([obs["proprio"], obs["command"]], axis=1)))
        fused = self.fuse(concat([prop, gh.reshape(n, -1), gd.reshape(n, -1),
                                  rays.reshape(n, -1)], axis=1)).tanh()
        return self.lstm(fused, Tensor(h), Tensor(c))

    def _value_input(self, obs: dict) -> np.ndarray:
        return np.concatenate(
            [obs["proprio"], obs["command"], obs["height_grid"][:, :, 0],
             obs["depth_grid"][:, :, 0] / DEPTH_RANGE,
             obs["rays"][:, ::VALUE_RAY_STRIDE] / RAY_CAP], axis=1)

    def act(self, obs: dict, h, c, rng: np.random.Generator,
            deterministic: bool = False):
        """Returns (code idx, residual, log_prob, value, motor action, (h,c))."""
        with no_grad():
            h_new, c_new = self._trunk(obs, h, c)
            logits = self.code_head(h_new)
            head = CategoricalHead(logits)
            idx = head.mode() if deterministic else head.sample(rng)
            lp = head.log_prob(idx).data
            residual = np.zeros((len(idx), N_JOINTS))
            if self.residual_head:
                res_mean = self.res_head(h_new)
                res_head = GaussianHead(res_mean, self.res_log_std)
                raw = res_head.mode() if deterministic else res_head.sample(rng)
                residual = np.clip(raw, -RESIDUAL_BOUND, RESIDUAL_BOUND)
                lp = lp + res_head.log_prob(raw).data
            value = self.value(Tensor(self._value_input(obs))).data[:, 0]
            motor = self.decode_action(obs["proprio"], idx) + residual
        return idx, residual, lp, value, motor, (h_new.data, c_new.data)

    def decode_action(self, proprio: np.ndarray, idx: np.ndarray) -> np.ndarray:
        """Frozen primitive decoder mean for the selected codes."""
        with no_grad():
            z_q = self.pmc.codebook.embeddings.data[np.asarray(idx, dtype=np.int64)]
            mean = self.pmc.decoder(Tensor(np.concatenate([proprio, z_q], axis=1)))
        return mean.data

    def code_distribution(self, obs: dict, h, c):
        """(log_probs (N, 256), residual mean, (h, c)) for distillation."""
        with no_grad():
            h_new, c_new = self._trunk(obs, h, c)
            head = CategoricalHead(self.code_head(h_new))
            res = self.res_head(h_new).data if self.residual_head else None
        return head.log_probs.data, res, (h_new.data, c_new.data)

    def evaluate(self, obs: dict, actions: np.ndarray):
        """PPO gradient path; actions = (code index, residual raw[8])."""
        h_new, _ = self._trunk(obs, obs["h"], obs["c"])
        head = CategoricalHead(self.code_head(h_new))
        idx = actions[:, 0].astype(np.int64)
        lp = head.log_prob(idx)
        entropy = head.entropy()
        if self.residual_head:
            res_head = GaussianHead(self.res_head(h_new), self.res_log_std)
            lp = lp + res_head.log_prob(actions[:, 1:1 + N_JOINTS])
            entropy = entropy + res_head.entropy()
        value = self.value(Tensor(self._value_input(obs))).reshape(-1)
        return lp, value, entropy, None


def _grid_stack(rng):
    return [Conv2d(rng, 1, 4, 1), Conv2d(rng, 4, 4, 4),
            Conv2d(rng, 4, 4, 2), Conv2d(rng, 4, 1, 2)]


def _grid_out_dim():
    h, w = 25, 13
    for k in (1, 4, 2, 2):
        h, w = h - k + 1, w - k + 1
    return h * w
