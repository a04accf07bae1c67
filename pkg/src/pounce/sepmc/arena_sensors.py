"""Top-down ray sensing for the arena proxy: 128 egocentric rays against
the four walls and the obstacle rectangles."""

from __future__ import annotations

import numpy as np

from .game import ARENA, GameState

N_RAYS = 128
_BASE_ANGLES = 2.0 * np.pi * np.arange(N_RAYS) / N_RAYS
RAY_CAP = 10.0


def arena_rays(state: GameState, agent_index: int) -> np.ndarray:
    agent = state.agents[agent_index]
    angles = agent.heading + _BASE_ANGLES
    d = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    p = agent.position
    dist = np.full(N_RAYS, RAY_CAP)

    # walls x=0, x=ARENA, y=0, y=ARENA
    for axis, bound in ((0, 0.0), (0, ARENA), (1, 0.0), (1, ARENA)):
        denom = d[:, axis]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (bound - p[axis]) / denom
        valid = (np.abs(denom) > 1e-12) & (t > 0)
        dist = np.where(valid, np.minimum(dist, np.where(valid, t, RAY_CAP)), dist)

    # obstacle rectangles via the slab method
    for o in state.obstacles:
        lo = np.array([min(o.x0, o.x1), min(o.y0, o.y1)])
        hi = np.array([max(o.x0, o.x1), max(o.y0, o.y1)])
        t_near = np.full(N_RAYS, -np.inf)
        t_far = np.full(N_RAYS, np.inf)
        ok = np.ones(N_RAYS, dtype=bool)
        for axis in range(2):
            da = d[:, axis]
            parallel = np.abs(da) < 1e-12
            with np.errstate(divide="ignore", invalid="ignore"):
                t1 = (lo[axis] - p[axis]) / da
                t2 = (hi[axis] - p[axis]) / da
            tmin = np.minimum(t1, t2)
            tmax = np.maximum(t1, t2)
            t_near = np.where(parallel, t_near, np.maximum(t_near, tmin))
            t_far = np.where(parallel, t_far, np.minimum(t_far, tmax))
            ok &= ~parallel | ((p[axis] >= lo[axis]) & (p[axis] <= hi[axis]))
        hit = ok & (t_near <= t_far) & (t_far > 0)
        t_hit = np.where(t_near > 0, t_near, t_far)
        dist = np.where(hit & (t_hit > 0), np.minimum(dist, t_hit), dist)
    return np.minimum(dist, RAY_CAP)


def proxy_proprio(state: GameState, agent_index: int) -> np.ndarray:
    a = state.agents[agent_index]
    return np.array([a.speed / 3.0, a.angular_velocity / 3.0,
                     np.cos(a.heading), np.sin(a.heading)])
