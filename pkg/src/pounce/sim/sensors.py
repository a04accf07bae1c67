"""Exteroceptive sensing: local height grid, front depth grid, and a
360-degree planar ray ring.

The reduced model is planar, so terrain is extruded laterally: all 13
lateral grid columns read the same profile, and rays with a lateral
component terminate on the arena walls at +/- wall_gap / 2.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .engine import RobotState
from .terrain import TerrainSpec

HEIGHT_ROWS = 25          # along travel, spanning 2.4 m
HEIGHT_COLS = 13          # lateral, spanning 1.2 m (extruded copies)
HEIGHT_SPAN = 2.4
DEPTH_ROWS = 25           # vertical, spanning 0.6 m
DEPTH_COLS = 13           # lateral, 0.5 m (extruded copies)
DEPTH_SPAN = 0.6
DEPTH_RANGE = 3.0
N_RAYS = 128
RAY_CAP = 10.0

_RAY_ANGLES = 2.0 * np.pi * np.arange(N_RAYS) / N_RAYS
_RAY_COS = np.cos(_RAY_ANGLES)
_RAY_SIN = np.sin(_RAY_ANGLES)


@dataclasses.dataclass
class Exteroception:
    height_grid: np.ndarray   # (25, 13) terrain height relative to root z
    depth_grid: np.ndarray    # (25, 13) forward depth, capped at 3 m
    rays: np.ndarray          # (128,) planar distances, capped at 10 m

    def as_dict(self):
        return {"height_grid": self.height_grid, "depth_grid": self.depth_grid,
                "rays": self.rays}


def _forward_hits(x0: float, z_heights: np.ndarray, faces: np.ndarray,
                  max_range: float) -> np.ndarray:
    """Distance from x0 to the first face ahead covering each ray height."""
    out = np.full(z_heights.shape, max_range)
    if faces.size == 0:
        return out
    for fx, lo, hi in faces:
        if fx <= x0:
            continue
        dist = fx - x0
        if dist >= max_range:
            continue
        covered = (z_heights >= lo) & (z_heights <= hi)
        out = np.where(covered & (dist < out), dist, out)
    return out


def exteroception(state: RobotState, terrain: TerrainSpec) -> Exteroception:
    """Pure function of (state, terrain); all values in the robot frame."""
    xs = state.x + np.linspace(-HEIGHT_SPAN / 2, HEIGHT_SPAN / 2, HEIGHT_ROWS)
    profile = terrain.height(xs) - state.z
    height_grid = np.repeat(profile[:, None], HEIGHT_COLS, axis=1)

    z_rows = state.z + np.linspace(-DEPTH_SPAN / 2, DEPTH_SPAN / 2, DEPTH_ROWS)
    faces = terrain.faces()
    depth_col = _forward_hits(state.x, z_rows, faces, DEPTH_RANGE)
    # rows below the terrain directly under the robot read zero depth
    under = terrain.height(np.array([state.x]))[0]
    depth_col = np.where(z_rows <= under, 0.0, depth_col)
    depth_grid = np.repeat(depth_col[:, None], DEPTH_COLS, axis=1)

    rays = np.full(N_RAYS, RAY_CAP)
    # lateral wall hits at y = +/- wall_gap / 2
    half_gap = terrain.wall_gap / 2.0
    lateral = np.abs(_RAY_SIN) > 1e-12
    rays[lateral] = np.minimum(rays[lateral], half_gap / np.abs(_RAY_SIN[lateral]))
    # face hits in the sagittal plane at the robot's center height
    if faces.size:
        for fx, lo, hi in faces:
            if not (lo <= state.z <= hi):
                continue
            dx = fx - state.x
            ahead = (_RAY_COS > 1e-12) if dx > 0 else (_RAY_COS < -1e-12)
            if abs(dx) < 1e-12:
                continue
            d = dx / _RAY_COS
            hit = ahead & (d < rays) & (d > 0)
            rays[hit] = d[hit]
    return Exteroception(height_grid=height_grid, depth_grid=depth_grid,
                         rays=np.minimum(rays, RAY_CAP))
