import numpy as np
import pytest

from pounce.sim import (TerrainSpec, flat_terrain, generate_terrain,
                        parse_terrain, serialize_terrain)
from pounce.sim.terrain import (BLOCK_HEIGHTS, CREEP_CLEARANCE_RANGE,
                                HURDLE_HEIGHT_RANGE, OBSTACLE_GAP_RANGE,
                                STAIR_HEIGHT_RANGE, STAIR_WIDTH_RANGE,
                                WALL_GAP_RANGE)


def test_flat_height_zero_everywhere():
    t = generate_terrain("flat", np.random.default_rng(0))
    xs = np.linspace(-5, 50, 200)
    np.testing.assert_array_equal(t.height(xs), np.zeros(200))


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        generate_terrain("lava", np.random.default_rng(0))


def test_stairs_within_ranges():
    rng = np.random.default_rng(1)
    for _ in range(50):
        t = generate_terrain("stairs", rng)
        rises = np.diff(np.concatenate([[0.0], t.heights[1:]]))
        widths = np.diff(t.xs)
        assert np.all(rises >= STAIR_HEIGHT_RANGE[0] - 1e-12)
        assert np.all(rises <= STAIR_HEIGHT_RANGE[1] + 1e-12)
        assert np.all(widths >= STAIR_WIDTH_RANGE[0] - 1e-12)
        assert np.all(widths <= STAIR_WIDTH_RANGE[1] + 1e-12)
        assert np.all(np.diff(t.heights) >= 0)


def test_hurdle_mean_height_monte_carlo():
    rng = np.random.default_rng(2)
    heights = []
    while len(heights) < 100000:
        t = generate_terrain("hurdles", rng)
        heights.extend(h for h in t.heights if h > 0)
    mean = np.mean(heights[:100000])
    assert abs(mean - 0.10) < 0.001


def test_hurdle_gaps_and_heights_in_range():
    rng = np.random.default_rng(3)
    for _ in range(50):
        t = generate_terrain("hurdles", rng)
        tops = t.heights[t.heights > 0]
        assert np.all(tops >= HURDLE_HEIGHT_RANGE[0]) and np.all(tops <= HURDLE_HEIGHT_RANGE[1])
        starts = t.xs[0::2]
        ends = t.xs[1::2]
        gaps = starts[1:] - ends[:-1]
        assert np.all(gaps >= OBSTACLE_GAP_RANGE[0] - 1e-12)
        assert np.all(gaps <= OBSTACLE_GAP_RANGE[1] + 1e-12)


def test_creep_clearances_in_range():
    rng = np.random.default_rng(4)
    for _ in range(50):
        t = generate_terrain("creep", rng)
        assert 1 <= len(t.bars) <= 10
        assert np.all(t.bars[:, 2] >= CREEP_CLEARANCE_RANGE[0])
        assert np.all(t.bars[:, 2] <= CREEP_CLEARANCE_RANGE[1])
        mid = (t.bars[0, 0] + t.bars[0, 1]) / 2
        assert t.clearance(np.array([mid]))[0] == t.bars[0, 2]
        assert np.isinf(t.clearance(np.array([t.bars[-1, 1] + 5.0]))[0])


def test_blocks_heights_from_set():
    rng = np.random.default_rng(5)
    for _ in range(30):
        t = generate_terrain("blocks", rng)
        tops = t.heights[t.heights > 0]
        for h in tops:
            assert any(abs(h - b) < 1e-12 for b in BLOCK_HEIGHTS)


def test_wall_gap_ranges():
    rng = np.random.default_rng(6)
    for kind in ("flat", "stairs", "hurdles", "blocks", "creep"):
        t = generate_terrain(kind, rng)
        assert WALL_GAP_RANGE[0] <= t.wall_gap <= WALL_GAP_RANGE[1]
    assert generate_terrain("arena", rng).wall_gap == 4.5


def test_cylinder_radii_in_range():
    rng = np.random.default_rng(7)
    for kind in ("stairs", "hurdles", "blocks"):
        t = generate_terrain(kind, rng)
        assert np.all(t.edges[:, 2] >= 0.0) and np.all(t.edges[:, 2] <= 0.02)


def test_serialize_round_trip():
    rng = np.random.default_rng(8)
    for kind in ("flat", "stairs", "hurdles", "blocks", "creep", "arena"):
        t = generate_terrain(kind, rng)
        t2 = parse_terrain(serialize_terrain(t))
        assert t2.kind == t.kind
        assert t2.wall_gap == t.wall_gap
        assert t2.course_end == t.course_end
        np.testing.assert_array_equal(t.xs, t2.xs)
        np.testing.assert_array_equal(t.heights, t2.heights)
        np.testing.assert_array_equal(t.bars, t2.bars)
        np.testing.assert_array_equal(t.edges, t2.edges)
        xs = np.linspace(-1, 40, 500)
        np.testing.assert_array_equal(t.height(xs), t2.height(xs))


def test_height_profile_lookup():
    t = TerrainSpec(kind="hurdles", xs=np.array([2.0, 2.1]),
                    heights=np.array([0.0, 0.15, 0.0]),
                    bars=np.empty((0, 3)), edges=np.empty((0, 3)),
                    wall_gap=10.0, course_end=4.0)
    np.testing.assert_allclose(t.height(np.array([1.0, 2.05, 3.0])), [0.0, 0.15, 0.0])
