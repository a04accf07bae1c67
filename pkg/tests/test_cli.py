import json
import pathlib

import numpy as np
import pytest

from pounce.cli import main
from pounce.motion import (RobotMorphology, robot_frame, robot_skeleton,
                           serialize_bvh)
from pounce.motion.bvh import MotionClip


@pytest.fixture
def robot_bvh(tmp_path):
    """A tiny robot-skeleton BVH walking forward."""
    morph = RobotMorphology()
    sk = robot_skeleton(morph)
    frames = []
    for i in range(30):
        t = i / 50.0
        q8 = np.empty(8)
        for leg, ph in enumerate((0.0, np.pi, np.pi, 0.0)):
            sign = 1.0 if leg < 2 else -1.0
            q8[2 * leg] = sign * (0.5 + 0.1 * np.sin(6 * t + ph))
            q8[2 * leg + 1] = sign * -(1.0 + 0.1 * np.sin(6 * t + ph))
        frames.append(robot_frame(morph, [0.5 * t, 0.0, 0.36],
                                  np.array([1.0, 0, 0, 0]), q8))
    clip = MotionClip(id="fixture", rate_hz=50.0, frames=frames).validate()
    path = tmp_path / "fixture.bvh"
    path.write_text(serialize_bvh(sk, clip))
    keymap = tmp_path / "keymap.json"
    keymap.write_text(json.dumps({
        "front": ["hip_FL", "hip_FR"], "hind": ["hip_HL", "hip_HR"],
        "toes": {leg: f"knee_{leg}" for leg in ("FL", "FR", "HL", "HR")},
        "root_height_scale": 1.0, "leg_spacing_scale": 1.0}))
    return path, keymap


def test_retarget_command(tmp_path, robot_bvh):
    bvh, keymap = robot_bvh
    out = tmp_path / "clips"
    code = main(["retarget", str(bvh), "--skeleton-map", str(keymap),
                 "--out", str(out)])
    assert code == 0
    files = list(out.glob("*.clip"))
    assert len(files) == 1
    from pounce.motion import load_planar
    clip = load_planar(files[0].read_text())
    assert clip.n_frames >= 2


def test_retarget_missing_map(tmp_path, robot_bvh, capsys):
    bvh, _ = robot_bvh
    code = main(["retarget", str(bvh), "--skeleton-map",
                 str(tmp_path / "absent.json"), "--out", str(tmp_path / "o")])
    assert code == 3
    assert "error:" in capsys.readouterr().err


def test_train_pmc_smoke_and_reproducible(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "pmc.total_steps": 2048, "pmc.n_envs": 4,
        "ppo.batch_size": 512, "ppo.lr": 3e-4, "seed": 11,
        "pmc.checkpoint_every": 2}))
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    assert main(["train", "pmc", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["train", "pmc", "--config", str(cfg), "--out", str(out2)]) == 0
    m1 = (out1 / "metrics.csv").read_bytes()
    m2 = (out2 / "metrics.csv").read_bytes()
    assert m1 == m2                       # bit-exact rerun
    assert (out1 / "config.json").exists()
    assert list(out1.glob("pmc-*.ckpt"))
    resolved = json.loads((out1 / "config.json").read_text())
    assert resolved["pmc.total_steps"] == 2048


def test_train_rejects_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"pmc.speed": 3}))
    code = main(["train", "pmc", "--config", str(cfg), "--out",
                 str(tmp_path / "out")])
    assert code == 3


def test_eval_tracking_prints_rewards(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "pmc.total_steps": 1024, "pmc.n_envs": 4, "ppo.batch_size": 512,
        "ppo.lr": 3e-4, "pmc.checkpoint_every": 1}))
    out = tmp_path / "run"
    assert main(["train", "pmc", "--config", str(cfg), "--out", str(out)]) == 0
    ckpt = sorted(out.glob("pmc-*.ckpt"))[-1]
    clips = tmp_path / "clips"
    clips.mkdir()
    from pounce.motion import save_planar, stand_clip
    (clips / "stand.clip").write_text(save_planar(stand_clip(duration=1.0)))
    capsys.readouterr()  # drain the training command's output
    code = main(["eval", "tracking", "--ckpt", str(ckpt), "--clips", str(clips)])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "clip,normalized_reward"
    for ln in lines[1:]:
        val = float(ln.split(",")[1])
        assert 0.0 <= val <= 1.0


def test_eval_tournament_usage_error(tmp_path, capsys):
    code = main(["eval", "tournament", "--ckpts", "one.ckpt", "--matches", "1"])
    assert code == 2


def test_gait_command(tmp_path):
    from tests.test_gait import scripted_trajectory
    traj = scripted_trajectory(strides=4)
    d = tmp_path / "groupA"
    d.mkdir()
    np.savez(d / "t0.npz", times=traj.times, contacts=traj.contacts,
             foot_pos=traj.foot_pos, root_x=traj.root_x)
    out = tmp_path / "report.csv"
    code = main(["gait", "--trajectories", str(d / "t0.npz"), "--out", str(out)])
    assert code == 0
    text = out.read_text()
    assert text.splitlines()[0].startswith("group,foot_pair,metric")
    assert "groupA" in text


def test_bad_checkpoint_is_data_error(tmp_path, capsys):
    bad = tmp_path / "junk.ckpt"
    bad.write_bytes(b"not a checkpoint at all")
    code = main(["eval", "tracking", "--ckpt", str(bad)])
    assert code == 3
