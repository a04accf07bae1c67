import numpy as np

from pounce.sim import RobotState, SimConfig, exteroception, flat_terrain, standing_state
from pounce.sim.terrain import TerrainSpec


def robot_at(x=0.0, z=0.4):
    s = standing_state(SimConfig())
    s.x, s.z = x, z
    return s


def hurdle_terrain(x0=1.0, h=0.15, w=0.1, wall_gap=10.0):
    return TerrainSpec(kind="hurdles", xs=np.array([x0, x0 + w]),
                       heights=np.array([0.0, h, 0.0]),
                       bars=np.empty((0, 3)), edges=np.empty((0, 3)),
                       wall_gap=wall_gap, course_end=x0 + 2.0)


def test_flat_height_grid_relative():
    ext = exteroception(robot_at(z=0.4), flat_terrain())
    assert ext.height_grid.shape == (25, 13)
    np.testing.assert_allclose(ext.height_grid, -0.4)


def test_lateral_columns_identical():
    ext = exteroception(robot_at(), hurdle_terrain())
    for col in range(13):
        np.testing.assert_array_equal(ext.height_grid[:, col], ext.height_grid[:, 0])
        np.testing.assert_array_equal(ext.depth_grid[:, col], ext.depth_grid[:, 0])


def test_hurdle_ahead_ray_and_grid():
    state = robot_at(x=0.0, z=0.3)
    ext = exteroception(state, hurdle_terrain(x0=1.0, h=0.15, wall_gap=30.0))
    # forward ray (index 0 points +x at the robot's center height) must
    # not see the 0.15 m hurdle: center is above it -> capped by walls/10 m
    assert ext.rays[0] > 9.0
    # height grid cells over the hurdle read the absolute 0.15 m height
    xs = state.x + np.linspace(-1.2, 1.2, 25)
    over = (xs >= 1.0) & (xs <= 1.1)
    np.testing.assert_allclose(ext.height_grid[over, 0] + state.z, 0.15)
    # a robot whose center height is below the hurdle top sees it ahead
    low = robot_at(x=0.0, z=0.1)
    ext_low = exteroception(low, hurdle_terrain(x0=1.0, h=0.15, wall_gap=30.0))
    assert abs(ext_low.rays[0] - 1.0) < 1e-9
    # depth rows below 0.15 m see the front face at 1.0 m
    z_rows = state.z + np.linspace(-0.3, 0.3, 25)
    blocked = (z_rows <= 0.15) & (z_rows > 0.0)
    np.testing.assert_allclose(ext.depth_grid[blocked, 0], 1.0)


def test_rays_capped_without_obstacles():
    ext = exteroception(robot_at(), flat_terrain(wall_gap=30.0))
    np.testing.assert_array_equal(ext.rays, np.full(128, 10.0))


def test_lateral_rays_hit_walls():
    ext = exteroception(robot_at(), flat_terrain(wall_gap=4.0))
    # ray 32 points straight +y (90 degrees): wall at 2.0 m
    assert abs(ext.rays[32] - 2.0) < 1e-9
    assert abs(ext.rays[96] - 2.0) < 1e-9


def test_sensors_pure_function():
    state = robot_at()
    t = hurdle_terrain()
    a = exteroception(state, t)
    b = exteroception(state, t)
    np.testing.assert_array_equal(a.height_grid, b.height_grid)
    np.testing.assert_array_equal(a.depth_grid, b.depth_grid)
    np.testing.assert_array_equal(a.rays, b.rays)
