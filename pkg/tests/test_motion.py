import numpy as np
import pytest

from pounce.motion import (BvhError, Frame, KeypointMap, MotionClip,
                           MotionDataset, RetargetConfig, RetargetError,
                           RobotMorphology, closed_form_ik, central_differences,
                           forward_kinematics, frame_at, load_annotations,
                           load_planar, make_clip, mirror_clip, parse_bvh,
                           project_sagittal, retarget_clip, robot_frame,
                           robot_skeleton, save_planar, serialize_bvh,
                           two_link_ik, walk_clip, stand_clip, bundled_clips)
from pounce.motion.bvh import euler_to_quat, quat_mul

SINGLE_JOINT = """\
HIERARCHY
ROOT hips
{
  OFFSET 0 0 0
  CHANNELS 6 Xposition Yposition Zposition Zrotation Yrotation Xrotation
  End Site
  {
    OFFSET 0 0 0.5
  }
}
MOTION
Frames: 2
Frame Time: 0.02
0 0 1.0 0 0 0
0.1 0 1.0 0 0 0
"""

CHAIN = """\
HIERARCHY
ROOT base
{
  OFFSET 0 0 0
  CHANNELS 6 Xposition Yposition Zposition Zrotation Yrotation Xrotation
  JOINT mid
  {
    OFFSET 0.1 0 0
    CHANNELS 1 Zrotation
    JOINT tip
    {
      OFFSET 0.2 0 0
      CHANNELS 1 Zrotation
      End Site
      {
        OFFSET 0.3 0 0
      }
    }
  }
}
MOTION
Frames: 2
Frame Time: 0.01
0 0 0 0 0 0 90 0
0 0 0 0 0 0 90 0
"""


def test_single_joint_header_readback():
    sk, clip = parse_bvh(SINGLE_JOINT)
    assert len(sk.joints) == 1
    assert clip.rate_hz == 50.0
    assert len(clip.frames) == 2
    np.testing.assert_allclose(clip.frames[1].root_position, [0.1, 0, 1.0])


def test_zero_rotations_identity_orientation():
    _, clip = parse_bvh(SINGLE_JOINT)
    for f in clip.frames:
        np.testing.assert_allclose(f.root_orientation, [1, 0, 0, 0], atol=1e-12)
        assert f.joint_angles.size == 0


def test_three_joint_chain_fk_hand_computed():
    sk, clip = parse_bvh(CHAIN)
    pos, ends = forward_kinematics(sk, clip.frames[0])
    # mid rotated +90 deg about Z: tip offset (0.2,0,0) maps to (0,0.2,0)
    np.testing.assert_allclose(pos[0], [0, 0, 0], atol=1e-12)
    np.testing.assert_allclose(pos[1], [0.1, 0, 0], atol=1e-12)
    np.testing.assert_allclose(pos[2], [0.1, 0.2, 0], atol=1e-12)
    # tip's own 0 rotation: end site extends along rotated +x (now +y)
    np.testing.assert_allclose(ends[2], [0.1, 0.5, 0], atol=1e-12)


def test_parse_errors_carry_line_numbers():
    bad = SINGLE_JOINT.replace("0.1 0 1.0 0 0 0", "0.1 0 oops 0 0 0")
    with pytest.raises(BvhError) as err:
        parse_bvh(bad)
    assert "line" in str(err.value)
    with pytest.raises(BvhError):
        parse_bvh("HIERARCHY\nJOINT x {")
    # channel-count mismatch: one number short in a motion row
    bad2 = SINGLE_JOINT.replace("0.1 0 1.0 0 0 0\n", "0.1 0 1.0 0 0\n")
    with pytest.raises(BvhError):
        parse_bvh(bad2)


def test_parse_serialize_parse_round_trip():
    rng = np.random.default_rng(0)
    sk, clip = parse_bvh(CHAIN)
    # randomize the motion for a stronger check
    frames = []
    for _ in range(5):
        frames.append(Frame(
            root_position=rng.uniform(-1, 1, 3),
            root_orientation=euler_to_quat(rng.uniform(-1, 1, 3), "ZYX"),
            joint_angles=rng.uniform(-1.5, 1.5, 2)))
    clip = MotionClip(id="rand", rate_hz=100.0, frames=frames).validate()
    text = serialize_bvh(sk, clip)
    sk2, clip2 = parse_bvh(text)
    assert [j.name for j in sk2.joints] == [j.name for j in sk.joints]
    for f1, f2 in zip(clip.frames, clip2.frames):
        np.testing.assert_allclose(f1.root_position, f2.root_position, atol=1e-9)
        # quaternions equal up to sign
        d = min(np.abs(f1.root_orientation - f2.root_orientation).max(),
                np.abs(f1.root_orientation + f2.root_orientation).max())
        assert d < 1e-9
        np.testing.assert_allclose(f1.joint_angles, f2.joint_angles, atol=1e-9)


def test_two_link_ik_matches_closed_form():
    l1 = l2 = 0.21
    target = np.array([0.0, -0.9 * (l1 + l2)])
    q, residual, ok = two_link_ik(target, l1, l2, knee_sign=-1.0)
    assert ok and residual < 1e-6
    expected = closed_form_ik(target, l1, l2, -1.0)
    np.testing.assert_allclose(q, expected, atol=1e-6)


def test_two_link_ik_unreachable_reports_failure():
    l1 = l2 = 0.21
    target = np.array([0.0, -1.5 * (l1 + l2)])
    _, residual, ok = two_link_ik(target, l1, l2, knee_sign=-1.0)
    assert not ok
    assert residual > 0.1


def identity_fixture(n_frames=20, speed=0.8):
    """Robot-skeleton clip walking forward with gentle leg motion."""
    morph = RobotMorphology()
    sk = robot_skeleton(morph)
    rng = np.random.default_rng(1)
    frames = []
    for i in range(n_frames):
        t = i / 50.0
        q8 = np.empty(8)
        for leg, ph in enumerate((0.0, np.pi, np.pi, 0.0)):
            sign = 1.0 if leg < 2 else -1.0   # planar: front knees bend back
            q8[2 * leg] = sign * (0.5 + 0.15 * np.sin(4 * t + ph))
            q8[2 * leg + 1] = sign * -(1.0 + 0.2 * np.sin(4 * t + ph))
        quat = quat_mul(euler_to_quat(np.array([0.0]), "Z"),
                        euler_to_quat(np.array([-0.05 * np.sin(t)]), "Y"))
        frames.append(robot_frame(morph, [speed * t, 0.0, 0.36], quat, q8))
    clip = MotionClip(id="fix", rate_hz=50.0, frames=frames).validate()
    keymap = KeypointMap(front=["hip_FL", "hip_FR"], hind=["hip_HL", "hip_HR"],
                         toes={leg: f"knee_{leg}" for leg in ("FL", "FR", "HL", "HR")})
    return clip, sk, morph, keymap


def test_retarget_identity():
    clip, sk, morph, keymap = identity_fixture()
    out, report = retarget_clip(clip, sk, morph, keymap,
                                RetargetConfig(root_height_scale=1.0,
                                               leg_spacing_scale=1.0))
    assert report.failure_fraction == 0.0
    for fin, fout in zip(clip.frames, out.frames):
        np.testing.assert_allclose(fout.root_position, fin.root_position, atol=1e-9)
        np.testing.assert_allclose(fout.joint_angles, fin.joint_angles, atol=1e-7)


def test_retarget_lowers_root():
    clip, sk, morph, keymap = identity_fixture()
    out, _ = retarget_clip(clip, sk, morph, keymap,
                           RetargetConfig(root_height_scale=0.9))
    for fin, fout in zip(clip.frames, out.frames):
        assert abs(fout.root_position[2] - 0.9 * fin.root_position[2]) < 1e-9


def test_retarget_rejects_unreachable_clip():
    clip, sk, morph, keymap = identity_fixture()
    shrunk = RobotMorphology(l1=0.1, l2=0.1)
    with pytest.raises(RetargetError):
        retarget_clip(clip, sk, shrunk, keymap)


def test_retarget_preserves_toe_height_shape():
    clip, sk, morph, keymap = identity_fixture(n_frames=60)
    out, _ = retarget_clip(clip, sk, morph, keymap,
                           RetargetConfig(root_height_scale=0.95,
                                          leg_spacing_scale=1.1))
    src_toe = []
    dst_toe = []
    for fin, fout in zip(clip.frames, out.frames):
        _, ends_in = forward_kinematics(sk, fin)
        _, ends_out = forward_kinematics(robot_skeleton(morph), fout)
        key = robot_skeleton(morph).joint_index("knee_FL")
        src_toe.append(ends_in[key][2])
        dst_toe.append(ends_out[key][2])
    corr = np.corrcoef(src_toe, dst_toe)[0, 1]
    assert corr > 0.95


def test_project_sagittal_stationary_zero_velocity():
    clip, sk, morph, keymap = identity_fixture(speed=0.0)
    frames = [Frame(root_position=np.array([0.3, -0.2, 0.36]),
                    root_orientation=np.array([1.0, 0, 0, 0]),
                    joint_angles=clip.frames[0].joint_angles.copy())
              for _ in range(30)]
    still = MotionClip(id="still", rate_hz=50.0, frames=frames).validate()
    planar = project_sagittal(still)
    np.testing.assert_allclose(planar.vel, 0.0, atol=1e-9)


def test_project_sagittal_constant_speed_span():
    morph = RobotMorphology()
    q8 = np.zeros(8)
    frames = []
    for i in range(201):  # 2.0 s at 100 Hz
        t = i / 100.0
        frames.append(robot_frame(morph, [t * 1.0, 0.0, 0.35],
                                  np.array([1.0, 0, 0, 0]), q8))
    clip = MotionClip(id="const", rate_hz=100.0, frames=frames).validate()
    planar = project_sagittal(clip)
    assert abs((planar.pos[-1, 0] - planar.pos[0, 0]) - 2.0) < 1e-6
    np.testing.assert_allclose(planar.vel[1:-1, 0], 1.0, atol=1e-6)


def test_project_sagittal_resampling_count():
    morph = RobotMorphology()
    frames = [robot_frame(morph, [0.01 * i, 0, 0.35], np.array([1.0, 0, 0, 0]),
                          np.zeros(8))
              for i in range(144)]  # 120 Hz, 1.19167 s span
    clip = MotionClip(id="c", rate_hz=120.0, frames=frames).validate()
    assert project_sagittal(clip).n_frames == 60


def test_project_sagittal_rejects_short_clip():
    morph = RobotMorphology()
    frames = [robot_frame(morph, [0, 0, 0.35], np.array([1.0, 0, 0, 0]), np.zeros(8))
              for _ in range(3)]  # 0.04 s at 50 Hz
    clip = MotionClip(id="short", rate_hz=50.0, frames=frames).validate()
    with pytest.raises(ValueError):
        project_sagittal(clip)


def test_frame_at_endpoints_and_midpoint():
    pos = np.zeros((3, 11))
    pos[0, 3] = 0.0
    pos[1, 3] = 0.2
    pos[2, 3] = 0.2
    clip = make_clip("t", pos)
    assert frame_at(clip, 0.0).q[0] == 0.0
    mid = frame_at(clip, 0.01)  # halfway between frames 0 and 1
    assert abs(mid.q[0] - 0.1) < 1e-12
    assert frame_at(clip, clip.duration).q[0] == 0.2
    with pytest.raises(ValueError):
        frame_at(clip, clip.duration + 0.1)


def test_frame_at_exact_at_samples():
    clip = walk_clip(1.0, duration=1.0)
    for i in (0, 7, clip.n_frames - 1):
        f = frame_at(clip, i / clip.rate_hz)
        np.testing.assert_array_equal(f.pose, clip.pos[i])


def test_mirror_swaps_legs_and_is_involution():
    clip = walk_clip(1.2, duration=1.0)
    m = mirror_clip(clip)
    np.testing.assert_array_equal(m.pos[:, 3:5], clip.pos[:, 5:7])
    np.testing.assert_array_equal(m.pos[:, 5:7], clip.pos[:, 3:5])
    np.testing.assert_array_equal(m.pos[:, 7:9], clip.pos[:, 9:11])
    np.testing.assert_array_equal(m.pos[:, :3], clip.pos[:, :3])
    mm = mirror_clip(m)
    np.testing.assert_array_equal(mm.pos, clip.pos)
    np.testing.assert_array_equal(mm.vel, clip.vel)


def test_mirror_symmetric_clip_fixed_point():
    clip = stand_clip(duration=0.5)
    m = mirror_clip(clip)
    np.testing.assert_array_equal(m.pos, clip.pos)


def test_mirror_example_values():
    pos = np.zeros((2, 11))
    pos[:, 3] = 0.3    # FL hip
    pos[:, 5] = -0.1   # FR hip
    clip = make_clip("m", pos)
    m = mirror_clip(clip)
    assert m.pos[0, 3] == -0.1 and m.pos[0, 5] == 0.3


def test_planar_save_load_bit_exact():
    clip = walk_clip(2.0, duration=1.0)
    text = save_planar(clip)
    clip2 = load_planar(text)
    np.testing.assert_array_equal(clip.pos, clip2.pos)
    np.testing.assert_array_equal(clip.vel, clip2.vel)
    assert save_planar(clip2) == text


def test_annotations_parse():
    ann = load_annotations("walk1.2 walk\nstand sit\n# comment\n")
    assert ann == {"walk1.2": "walk", "stand": "sit"}


def test_dataset_mirrors_and_clamps_returns():
    ds = MotionDataset(bundled_clips()[:3])
    assert len(ds) == 6
    ds.update_return(0, 2.0)
    assert 0.0 <= ds.returns[0] <= 1.0
    ds.update_return(1, 0.8)
    assert abs(ds.returns[1] - 0.05 * 0.8) < 1e-12


def test_velocity_consistency_invariant():
    for clip in bundled_clips():
        expect = central_differences(clip.pos, clip.rate_hz)
        assert np.max(np.abs(expect - clip.vel)) < 1e-9
