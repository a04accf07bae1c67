"""Strategic-level network: task features through dense layers, the
360-degree ray ring through the cyclic conv stack, fused into an LSTM
whose output parameterizes the navigation command."""

from __future__ import annotations

import numpy as np

from ..nn import (Conv1d, GaussianHead, LSTMCell, Linear, MLP, Tensor,
                  concat, no_grad)
from .game import ARENA, SPEED_RANGE, TASK_OBS_DIM, NavigationCommand

PROXY_PROPRIO_DIM = 4          # speed, angular velocity, cos/sin heading
N_RAYS = 128
LSTM_HIDDEN = 32
VALUE_RAY_STRIDE = 8


class StrategicPolicy:
    def __init__(self, rng: np.random.Generator):
        self.task_net = MLP(rng, TASK_OBS_DIM, [256], 256, out_gain=1.0,
                            out_activation="tanh")
        self.ray_convs = [Conv1d(rng, 1, 4, 4, cyclic=True),
                          Conv1d(rng, 4, 4, 4, stride=2),
                          Conv1d(rng, 4, 4, 4, stride=2),
                          Conv1d(rng, 4, 1, 4, stride=2)]
        ray_out = self._ray_dim()
        self.proprio_net = MLP(rng, PROXY_PROPRIO_DIM, [64], 64, out_gain=1.0,
                               out_activation="tanh")
        self.fuse = Linear(rng, 256 + ray_out + 64, 256)
        self.lstm = LSTMCell(rng, 256, LSTM_HIDDEN)
        self.head = Linear(rng, LSTM_HIDDEN, 2, gain=0.01)  # turn, raw speed
        self.log_std = Tensor(np.array([np.log(0.4), np.log(0.4)]),
                              requires_grad=True)
        value_in = TASK_OBS_DIM + PROXY_PROPRIO_DIM + N_RAYS // VALUE_RAY_STRIDE
        self.value = MLP(rng, value_in, [256, 256], 1, out_gain=1.0)
        self.frozen_prefixes = ()

    def _ray_dim(self) -> int:
        x = np.zeros((1, 1, N_RAYS))
        with no_grad():
            t = Tensor(x)
            for conv in self.ray_convs:
                t = conv(t).relu()
        return int(np.prod(t.data.shape[1:]))

    def named_parameters(self):
        for n, p in self.task_net.named_parameters():
            yield f"sepmc/task/{n}", p
        for i, conv in enumerate(self.ray_convs):
            for n, p in conv.named_parameters():
                yield f"sepmc/rays.{i}/{n}", p
        for n, p in self.proprio_net.named_parameters():
            yield f"sepmc/proprio/{n}", p
        for n, p in self.fuse.named_parameters():
            yield f"sepmc/fuse/{n}", p
        for n, p in self.lstm.named_parameters():
            yield f"sepmc/lstm/{n}", p
        for n, p in self.head.named_parameters():
            yield f"sepmc/head/{n}", p
        yield "sepmc/log_std", self.log_std
        for n, p in self.value.named_parameters():
            yield f"sepmc/value/{n}", p

    def state_arrays(self):
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_arrays(self, arrays):
        for name, p in self.named_parameters():
            src = np.asarray(arrays[name], dtype=np.float64)
            if src.shape != p.data.shape:
                raise ValueError(f"shape mismatch for {name}")
            p.data = src.copy()

    def initial_state(self, batch: int):
        return self.lstm.initial_state(batch)

    def _trunk(self, obs: dict, h, c):
        task = self.task_net(Tensor(obs["task"]))
        rays = Tensor(obs["rays"][:, None, :] / ARENA)
        for conv in self.ray_convs:
            rays = conv(rays).relu()
        rays = rays.reshape(rays.data.shape[0], -1)
        prop = self.proprio_net(Tensor(obs["proprio"]))
        fused = self.fuse(concat([task, rays, prop], axis=1)).tanh()
        h_new, c_new = self.lstm(fused, Tensor(h), Tensor(c))
        return h_new, c_new

    def _value_input(self, obs):
        return np.concatenate(
            [obs["task"], obs["proprio"],
             obs["rays"][:, ::VALUE_RAY_STRIDE] / ARENA], axis=1)

    def act(self, obs: dict, h, c, rng: np.random.Generator,
            deterministic: bool = False):
        """Returns (raw action (N,2), log_prob, value, (h', c'))."""
        with no_grad():
            h_new, c_new = self._trunk(obs, h, c)
            mean = self.head(h_new)
            head = GaussianHead(mean, self.log_std)
            action = head.mode() if deterministic else head.sample(rng)
            lp = head.log_prob(action).data
            value = self.value(Tensor(self._value_input(obs))).data[:, 0]
        return action, lp, value, (h_new.data, c_new.data)

    def evaluate(self, obs: dict, actions: np.ndarray):
        h_new, _ = self._trunk(obs, obs["h"], obs["c"])
        mean = self.head(h_new)
        head = GaussianHead(mean, self.log_std)
        lp = head.log_prob(actions)
        value = self.value(Tensor(self._value_input(obs))).reshape(-1)
        return lp, value, head.entropy(), None


def action_to_command(action: np.ndarray, heading: float,
                      pinned_speed: float | None = None) -> NavigationCommand:
    """Map the raw 2-D policy action to a navigation command.

    Direction comes from an egocentric turn angle; speed from a squashed
    head bounded to [0.5, 3.0]. The pinned-speed evaluation mode forces
    0.5 m/s regardless of the network output.
    """
    turn, raw_speed = float(action[0]), float(action[1])
    angle = heading + np.clip(turn, -np.pi, np.pi)
    lo, hi = SPEED_RANGE
    speed = lo + (hi - lo) / (1.0 + np.exp(-raw_speed))
    if pinned_speed is not None:
        speed = pinned_speed
    return NavigationCommand.from_angle(angle, speed)
