"""Procedural terrain: piecewise-constant height profiles, overhead
creep bars, edge cylinders, and lateral walls (sensor-only).

Sampling ranges follow the training randomization the controllers are
exposed to: stair rises in [0, 0.18] m with tread widths [0.34, 0.40] m,
creep clearances [0.25, 0.30] m, hurdle heights [0.05, 0.15] m, block
heights from {0.1, 0.25, 0.4} m, obstacle gaps [1, 3] m, wall gaps
[1, 10] m, and edge cylinder radii [0, 0.02] m.
"""

from __future__ import annotations

import dataclasses
import io

import numpy as np

KINDS = ("flat", "stairs", "hurdles", "blocks", "creep", "arena")

CYLINDER_RADIUS_RANGE = (0.0, 0.02)
STAIR_HEIGHT_RANGE = (0.0, 0.18)
STAIR_WIDTH_RANGE = (0.34, 0.40)
CREEP_CLEARANCE_RANGE = (0.25, 0.30)
HURDLE_HEIGHT_RANGE = (0.05, 0.15)
OBSTACLE_GAP_RANGE = (1.0, 3.0)
OBSTACLE_COUNT_RANGE = (1, 10)      # inclusive
BLOCK_HEIGHTS = (0.1, 0.25, 0.4)
BLOCK_WIDTH = 0.5
BLOCK_SET_RANGE = (1, 5)            # inclusive
WALL_GAP_RANGE = (1.0, 10.0)
HURDLE_WIDTH = 0.1
BAR_THICKNESS = 0.05
COURSE_START = 2.0
COURSE_MARGIN = 1.5


@dataclasses.dataclass
class TerrainSpec:
    kind: str
    # height profile h(x): heights[i] applies on (xs[i-1], xs[i]]-style bins
    xs: np.ndarray                  # ascending breakpoints, shape (B,)
    heights: np.ndarray             # shape (B + 1,)
    bars: np.ndarray                # (n, 3): x0, x1, clearance height
    edges: np.ndarray               # (n, 3): x, z, cylinder radius
    wall_gap: float
    course_end: float

    def height(self, x) -> np.ndarray:
        """Terrain height under x (scalar or array)."""
        x = np.asarray(x, dtype=np.float64)
        if self.xs.size == 0:
            return np.zeros_like(x)
        idx = np.searchsorted(self.xs, x, side="right")
        return self.heights[idx]

    def clearance(self, x) -> np.ndarray:
        """Overhead clearance above x (inf when no bar overhead)."""
        x = np.asarray(x, dtype=np.float64)
        out = np.full(x.shape, np.inf)
        for x0, x1, c in self.bars:
            mask = (x >= x0) & (x <= x1)
            out = np.where(mask, np.minimum(out, c), out)
        return out

    def faces(self) -> np.ndarray:
        """Vertical faces (x, z_lo, z_hi) of the height profile plus bar
        front/back faces; used by ray sensors."""
        rows = []
        for i, x in enumerate(self.xs):
            lo, hi = self.heights[i], self.heights[i + 1]
            if lo != hi:
                rows.append((x, min(lo, hi), max(lo, hi)))
        for x0, x1, c in self.bars:
            rows.append((x0, c, c + BAR_THICKNESS))
            rows.append((x1, c, c + BAR_THICKNESS))
        return np.array(rows, dtype=np.float64).reshape(-1, 3)


def flat_terrain(wall_gap: float = 10.0, kind: str = "flat") -> TerrainSpec:
    return TerrainSpec(kind=kind, xs=np.empty(0), heights=np.zeros(1),
                       bars=np.empty((0, 3)), edges=np.empty((0, 3)),
                       wall_gap=wall_gap, course_end=COURSE_START + COURSE_MARGIN)


def _edge(rng, x, z):
    return (x, z, rng.uniform(*CYLINDER_RADIUS_RANGE))


def generate_terrain(kind: str, rng: np.random.Generator) -> TerrainSpec:
    """Sample a terrain of the given kind from its randomization ranges."""
    if kind not in KINDS:
        raise ValueError(f"unknown terrain kind {kind!r}")
    wall_gap = 4.5 if kind == "arena" else rng.uniform(*WALL_GAP_RANGE)
    if kind in ("flat", "arena"):
        t = flat_terrain(wall_gap, kind)
        return t

    xs, heights, bars, edges = [], [0.0], [], []
    x = COURSE_START
    if kind == "stairs":
        n_steps = int(rng.integers(3, 9))
        level = 0.0
        for _ in range(n_steps):
            rise = rng.uniform(*STAIR_HEIGHT_RANGE)
            width = rng.uniform(*STAIR_WIDTH_RANGE)
            level += rise
            xs.append(x)
            heights.append(level)
            edges.append(_edge(rng, x, level))
            x += width
    elif kind == "hurdles":
        count = int(rng.integers(OBSTACLE_COUNT_RANGE[0], OBSTACLE_COUNT_RANGE[1] + 1))
        for _ in range(count):
            h = rng.uniform(*HURDLE_HEIGHT_RANGE)
            xs.extend([x, x + HURDLE_WIDTH])
            heights.extend([h, 0.0])
            edges.append(_edge(rng, x, h))
            edges.append(_edge(rng, x + HURDLE_WIDTH, h))
            x += HURDLE_WIDTH + rng.uniform(*OBSTACLE_GAP_RANGE)
    elif kind == "blocks":
        n_sets = int(rng.integers(BLOCK_SET_RANGE[0], BLOCK_SET_RANGE[1] + 1))
        for _ in range(n_sets):
            n_blocks = int(rng.integers(3, 6))
            for _ in range(n_blocks):
                h = float(rng.choice(BLOCK_HEIGHTS))
                xs.extend([x, x + BLOCK_WIDTH])
                heights.extend([h, 0.0])
                edges.append(_edge(rng, x, h))
                edges.append(_edge(rng, x + BLOCK_WIDTH, h))
                x += BLOCK_WIDTH
            x += rng.uniform(*OBSTACLE_GAP_RANGE)
    elif kind == "creep":
        count = int(rng.integers(OBSTACLE_COUNT_RANGE[0], OBSTACLE_COUNT_RANGE[1] + 1))
        for _ in range(count):
            c = rng.uniform(*CREEP_CLEARANCE_RANGE)
            bars.append((x, x + HURDLE_WIDTH, c))
            x += HURDLE_WIDTH + rng.uniform(*OBSTACLE_GAP_RANGE)

    return TerrainSpec(
        kind=kind,
        xs=np.asarray(xs, dtype=np.float64),
        heights=np.asarray(heights, dtype=np.float64),
        bars=np.asarray(bars, dtype=np.float64).reshape(-1, 3),
        edges=np.asarray(edges, dtype=np.float64).reshape(-1, 3),
        wall_gap=wall_gap,
        course_end=x + COURSE_MARGIN)


def serialize_terrain(t: TerrainSpec) -> str:
    out = io.StringIO()
    out.write(f"terrain v1 {t.kind}\n")
    out.write(f"wall_gap {float(t.wall_gap)!r}\n")
    out.write(f"course_end {float(t.course_end)!r}\n")
    for x, h in zip(t.xs, t.heights[1:]):
        out.write(f"step {float(x)!r} {float(h)!r}\n")
    for x0, x1, c in t.bars:
        out.write(f"bar {float(x0)!r} {float(x1)!r} {float(c)!r}\n")
    for x, z, r in t.edges:
        out.write(f"edge {float(x)!r} {float(z)!r} {float(r)!r}\n")
    return out.getvalue()


def parse_terrain(text: str) -> TerrainSpec:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[:2] != ["terrain", "v1"]:
        raise ValueError("not a terrain v1 document")
    kind = head[2]
    xs, heights, bars, edges = [], [0.0], [], []
    wall_gap, course_end = 10.0, COURSE_START + COURSE_MARGIN
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "wall_gap":
            wall_gap = float(parts[1])
        elif parts[0] == "course_end":
            course_end = float(parts[1])
        elif parts[0] == "step":
            xs.append(float(parts[1]))
            heights.append(float(parts[2]))
        elif parts[0] == "bar":
            bars.append(tuple(map(float, parts[1:4])))
        elif parts[0] == "edge":
            edges.append(tuple(map(float, parts[1:4])))
        else:
            raise ValueError(f"unknown terrain record {parts[0]!r}")
    return TerrainSpec(kind=kind, xs=np.asarray(xs), heights=np.asarray(heights),
                       bars=np.asarray(bars).reshape(-1, 3),
                       edges=np.asarray(edges).reshape(-1, 3),
                       wall_gap=wall_gap, course_end=course_end)
