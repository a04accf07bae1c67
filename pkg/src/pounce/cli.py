"""Command-line entry point.

Subcommands: retarget, train (pmc|epmc|sepmc), distill, eval
(tracking|traverse|tournament), gait, serve. Every run directory gets
the resolved config echoed as config.json; reruns with identical config
and seed reproduce metrics byte-for-byte. Exit codes: 0 ok, 2 usage,
3 data error, 4 training fault.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

import numpy as np

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_TRAINING = 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _fail(message: str, code: int):
    raise CliError(message, code)


def _load_config(path):
    from .config import ConfigError, RunConfig
    if path is None:
        return RunConfig()
    try:
        return RunConfig.load(path)
    except FileNotFoundError:
        _fail(f"config not found: {path}", EXIT_DATA)
    except ConfigError as e:
        _fail(f"bad config: {e}", EXIT_DATA)


def _prepare_run_dir(out_dir, config):
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(config.to_json())
    return out


def _load_dataset(config):
    from .motion import MotionDataset, bundled_clips, load_planar
    clips_dir = config["paths.clips"]
    if not clips_dir:
        return MotionDataset(bundled_clips())
    path = pathlib.Path(clips_dir)
    if not path.is_dir():
        _fail(f"clips directory not found: {clips_dir}", EXIT_DATA)
    clips = []
    for f in sorted(path.glob("*.clip")):
        try:
            clips.append(load_planar(f.read_text()))
        except ValueError as e:
            _fail(f"bad clip {f.name}: {e}", EXIT_DATA)
    if not clips:
        _fail(f"no .clip files in {clips_dir}", EXIT_DATA)
    return MotionDataset(clips)


def _write_checkpoint(path, stage, arrays, metadata):
    from .checkpoint import PolicyCheckpoint, default_morphology, write_checkpoint
    ckpt = PolicyCheckpoint(stage=stage, blocks=arrays,
                            morphology=default_morphology(), metadata=metadata)
    write_checkpoint(path, ckpt)


def _read_checkpoint(path, expected_stage=None):
    from .checkpoint import CheckpointError, read_checkpoint
    try:
        ckpt = read_checkpoint(path)
    except (OSError, CheckpointError) as e:
        _fail(f"cannot load checkpoint {path}: {e}", EXIT_DATA)
    if expected_stage and ckpt.stage != expected_stage:
        _fail(f"checkpoint {path} is stage {ckpt.stage!r}, "
              f"expected {expected_stage!r}", EXIT_DATA)
    return ckpt


# -- subcommands ------------------------------------------------------------------


def cmd_retarget(args):
    from .motion import (KeypointMap, RetargetConfig, RetargetError,
                         RobotMorphology, parse_bvh, project_sagittal,
                         retarget_clip, save_planar, swap_y_up)
    try:
        spec = json.loads(pathlib.Path(args.skeleton_map).read_text())
        keymap = KeypointMap(front=spec["front"], hind=spec["hind"],
                             toes=spec["toes"])
        cfg = RetargetConfig(
            root_height_scale=spec.get("root_height_scale", 0.9),
            leg_spacing_scale=spec.get("leg_spacing_scale", 1.15))
        y_up = spec.get("y_up", False)
    except (OSError, KeyError, ValueError) as e:
        _fail(f"bad skeleton map: {e}", EXIT_DATA)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    morph = RobotMorphology()
    for bvh_path in args.bvh:
        path = pathlib.Path(bvh_path)
        try:
            skeleton, clip = parse_bvh(path.read_text(), clip_id=path.stem)
            if y_up:
                clip = swap_y_up(clip)
            robot_clip, report = retarget_clip(clip, skeleton, morph, keymap, cfg)
            planar = project_sagittal(robot_clip)
        except (OSError, ValueError, RetargetError) as e:
            _fail(f"{path.name}: {e}", EXIT_DATA)
        (out / f"{path.stem}.clip").write_text(save_planar(planar))
        print(f"{path.stem}: {planar.n_frames} frames, "
              f"{report.failure_fraction:.1%} IK failures")
    return EXIT_OK


def _ppo_config(config, stage_defaults):
    """Stage-specific table defaults apply unless the config overrides."""
    from .ppo import PPOConfig
    clip, lr, batch = stage_defaults

    def pick(key, stage_value):
        return config[key] if key in config.overridden else stage_value

    return PPOConfig(
        gamma=config["ppo.gamma"], lam=config["ppo.lambda"],
        clip=pick("ppo.clip", clip), lr=pick("ppo.lr", lr),
        batch_size=int(pick("ppo.batch_size", batch)),
        epochs=int(config["ppo.epochs"]),
        minibatches=int(config["ppo.minibatches"]),
        entropy_coef=config["ppo.entropy_coef"],
        value_coef=config["ppo.value_coef"])


def cmd_train(args):
    config = _load_config(args.config)
    out = _prepare_run_dir(args.out, config)
    seed = int(config["seed"])
    if args.stage == "pmc":
        from .pmc import PmcTrainConfig, train_pmc
        dataset = _load_dataset(config)
        cfg = PmcTrainConfig(
            total_steps=int(config["pmc.total_steps"]),
            n_envs=int(config["pmc.n_envs"]), seed=seed,
            ppo=_ppo_config(config, (0.2, 1e-5, 8192)),
            alpha1=config["pmc.alpha1"],
            checkpoint_every=int(config["pmc.checkpoint_every"]),
            stop_at_reward=config["pmc.stop_at_reward"] or None,
            randomize=config["sim.randomize"])
        saved = []

        def on_ckpt(step, policy):
            path = out / f"pmc-{step:09d}.ckpt"
            _write_checkpoint(path, "pmc", policy.state_arrays(),
                              {"steps": step, "config_hash": config.hash(),
                               "parents": []})
            saved.append(path)

        policy, metrics, history = train_pmc(dataset, cfg, on_checkpoint=on_ckpt)
        (out / "metrics.csv").write_text(metrics.text())
        if history and history[-1].get("aborted"):
            _fail("training diverged (non-finite loss)", EXIT_TRAINING)
        print(f"trained pmc: {len(saved)} checkpoints, "
              f"final reward {history[-1]['mean_reward']:.3f}")
        return EXIT_OK
    if args.stage == "epmc":
        from .epmc import EpmcTrainConfig, train_epmc
        pmc_path = config["epmc.pmc_checkpoint"]
        arrays = None
        if pmc_path:
            arrays = _read_checkpoint(pmc_path, "pmc").blocks
        elif not config["epmc.from_scratch"]:
            _fail("epmc training needs epmc.pmc_checkpoint "
                  "(or epmc.from_scratch=true)", EXIT_USAGE)
        dataset = _load_dataset(config) if config["epmc.scenario"] == "flat" else None
        cfg = EpmcTrainConfig(
            scenario=config["epmc.scenario"],
            total_steps=int(config["epmc.total_steps"]),
            n_envs=int(config["epmc.n_envs"]), seed=seed,
            ppo=_ppo_config(config, (0.1, 5e-5, 16384)),
            gail_weight=config["epmc.gail_weight"],
            from_scratch=config["epmc.from_scratch"],
            horizon=config["epmc.horizon"] or None)
        policy, history = train_epmc(cfg, arrays, dataset=dataset)
        _write_checkpoint(out / "epmc-final.ckpt", "epmc", policy.state_arrays(),
                          {"steps": int(config["epmc.total_steps"]),
                           "config_hash": config.hash(),
                           "parents": [str(pmc_path)],
                           "scenario": config["epmc.scenario"]})
        _write_metrics_csv(out / "metrics.csv", history)
        if history and history[-1].get("aborted"):
            _fail("training diverged (non-finite loss)", EXIT_TRAINING)
        print(f"trained epmc[{cfg.scenario}]: "
              f"command reward {history[-1]['command_reward']:.3f}, "
              f"success rate {history[-1]['success_rate']:.2f}")
        return EXIT_OK
    if args.stage == "sepmc":
        from .sepmc import SepmcTrainConfig, match_log_csv, train_sepmc
        cfg = SepmcTrainConfig(
            total_steps=int(config["sepmc.total_steps"]),
            n_envs=int(config["sepmc.n_envs"]), seed=seed,
            ppo=_ppo_config(config, (0.1, 1e-5, 32768)),
            alpha2=config["sepmc.alpha2"],
            snapshot_every=int(config["sepmc.snapshot_every"]))

        def on_ckpt(step, cid, policy):
            _write_checkpoint(out / f"sepmc-{cid}.ckpt", "sepmc",
                              policy.state_arrays(),
                              {"steps": step, "config_hash": config.hash(),
                               "parents": []})

        policy, pool, history = train_sepmc(cfg, on_checkpoint=on_ckpt)
        _write_metrics_csv(out / "metrics.csv", history)
        if history and history[-1].get("aborted"):
            _fail("training diverged (non-finite loss)", EXIT_TRAINING)
        print(f"trained sepmc: pool size {len(pool)}, "
              f"win rate {history[-1]['win_rate']:.2f}")
        return EXIT_OK
    _fail(f"unknown stage {args.stage!r}", EXIT_USAGE)


def _write_metrics_csv(path, history):
    if not history:
        path.write_text("")
        return
    keys = sorted({k for h in history for k in h})
    lines = [",".join(keys)]
    for h in history:
        lines.append(",".join(f"{h.get(k, '')}" for k in keys))
    path.write_text("\n".join(lines) + "\n")


def cmd_distill(args):
    from .epmc import (DistillConfig, TeacherSet, build_policy, distill)
    config = _load_config(args.config)
    out = _prepare_run_dir(args.out, config)
    spec = config["distill.teachers"]
    if not spec:
        _fail("distill.teachers must list scenario=path pairs", EXIT_USAGE)
    teachers = {}
    parents = []
    pmc_blocks = None
    for item in spec.split(","):
        scenario, _, path = item.partition("=")
        if not path:
            _fail(f"bad teacher spec {item!r}", EXIT_USAGE)
        ckpt = _read_checkpoint(path.strip(), "epmc")
        rng = np.random.default_rng(int(config["seed"]))
        teacher = build_policy(rng, None,
                               "stairs" if "epmc/res_head/W" in ckpt.blocks
                               else scenario.strip())
        teacher.load_arrays(ckpt.blocks)
        teachers[scenario.strip()] = teacher
        parents.append(path.strip())
        pmc_blocks = {k: v for k, v in ckpt.blocks.items() if k.startswith("pmc/")}
    recovery = None
    if config["distill.recovery"]:
        ckpt = _read_checkpoint(config["distill.recovery"], "epmc")
        recovery = build_policy(np.random.default_rng(0), None, "recovery")
        recovery.load_arrays(ckpt.blocks)
    rng = np.random.default_rng(int(config["seed"]) + 1)
    student = build_policy(rng, pmc_blocks, "uniform")
    cfg = DistillConfig(total_steps=int(config["distill.steps"]),
                        seed=int(config["seed"]), lr=config["distill.lr"])
    student, history = distill(TeacherSet(teachers, recovery), student, cfg)
    _write_checkpoint(out / "epmc-uniform.ckpt", "epmc-uniform",
                      student.state_arrays(),
                      {"config_hash": config.hash(), "parents": parents})
    _write_metrics_csv(out / "metrics.csv", history)
    print(f"distilled {len(teachers)} teachers; final KL "
          f"{history[-1]['mean_kl']:.4f}")
    return EXIT_OK


def cmd_eval_tracking(args):
    from .motion import MotionDataset, load_planar
    from .pmc import PmcPolicy, evaluate_tracking
    ckpt = _read_checkpoint(args.ckpt, "pmc")
    policy = PmcPolicy(np.random.default_rng(0))
    try:
        policy.load_arrays(ckpt.blocks)
    except (KeyError, ValueError) as e:
        _fail(f"incompatible checkpoint: {e}", EXIT_DATA)
    if args.clips:
        clips = []
        for f in sorted(pathlib.Path(args.clips).glob("*.clip")):
            clips.append(load_planar(f.read_text()))
        if not clips:
            _fail(f"no .clip files in {args.clips}", EXIT_DATA)
        dataset = MotionDataset(clips)
    else:
        dataset = _load_dataset(_load_config(None))
    scores = evaluate_tracking(policy, dataset, episodes_per_clip=1,
                               seed=int(args.seed))
    print("clip,normalized_reward")
    for cid, score in scores.items():
        print(f"{cid},{score:.4f}")
    return EXIT_OK


def cmd_eval_traverse(args):
    from .epmc import build_policy, evaluate_epmc
    ckpt = _read_checkpoint(args.ckpt)
    if ckpt.stage not in ("epmc", "epmc-uniform"):
        _fail(f"expected an epmc checkpoint, got {ckpt.stage}", EXIT_DATA)
    scenario_head = "stairs" if "epmc/res_head/W" in ckpt.blocks else args.scenario
    policy = build_policy(np.random.default_rng(0), None, scenario_head)
    policy.load_arrays(ckpt.blocks)
    result = evaluate_epmc(policy, args.scenario, episodes=int(args.episodes),
                           seed=int(args.seed))
    print(json.dumps(result, indent=2))
    return EXIT_OK


def cmd_eval_tournament(args):
    from .sepmc import play_match, run_tournament, tournament_csv
    if len(args.ckpts) < 2:
        _fail("tournament needs at least 2 checkpoints", EXIT_USAGE)
    pools = {}
    for path in args.ckpts:
        ckpt = _read_checkpoint(path, "sepmc")
        pools[path] = ckpt.blocks
    rng = np.random.default_rng(int(args.seed))

    def match(a, b, r):
        rec = play_match(pools[a], pools[b], seed=int(r.integers(2 ** 31)))
        return {"a": 1.0, "b": 0.0, "draw": 0.5}[rec["winner"]]

    table = run_tournament(list(pools), match, matches_per_pair=int(args.matches),
                           rng=rng)
    print(tournament_csv(table), end="")
    if args.out:
        pathlib.Path(args.out).write_text(tournament_csv(table))
    return EXIT_OK


def cmd_gait(args):
    from .gait import Trajectory, gait_report, report_csv
    groups = {}
    for path in args.trajectories:
        p = pathlib.Path(path)
        try:
            data = np.load(p)
            traj = Trajectory(times=data["times"], contacts=data["contacts"],
                              foot_pos=data["foot_pos"], root_x=data["root_x"])
        except (OSError, KeyError, ValueError) as e:
            _fail(f"bad trajectory {p.name}: {e}", EXIT_DATA)
        groups.setdefault(p.parent.name or "default", []).append(traj)
    rows = gait_report(groups)
    text = report_csv(rows)
    pathlib.Path(args.out).write_text(text)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_serve(args):
    import asyncio

    from .serve import serve
    arrays = None
    if args.ckpt:
        ckpt = _read_checkpoint(args.ckpt, "sepmc")
        arrays = ckpt.blocks
    if args.backend == "full":
        _fail("the full locomotion backend is not wired into serve; "
              "use --backend proxy", EXIT_USAGE)
    static = pathlib.Path(__file__).resolve().parents[2] / "frontend" / "dist"
    asyncio.run(serve(arrays, int(args.port),
                      static_dir=static if static.is_dir() else None))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="pounce")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("retarget", help="BVH files to planar clips")
    r.add_argument("bvh", nargs="+")
    r.add_argument("--skeleton-map", required=True)
    r.add_argument("--out", required=True)
    r.set_defaults(fn=cmd_retarget)

    t = sub.add_parser("train", help="run a training stage")
    t.add_argument("stage", choices=["pmc", "epmc", "sepmc"])
    t.add_argument("--config")
    t.add_argument("--out", required=True)
    t.set_defaults(fn=cmd_train)

    d = sub.add_parser("distill", help="multi-expert distillation")
    d.add_argument("--config", required=True)
    d.add_argument("--out", required=True)
    d.set_defaults(fn=cmd_distill)

    e = sub.add_parser("eval", help="evaluation harnesses")
    esub = e.add_subparsers(dest="eval_kind", required=True)
    et = esub.add_parser("tracking")
    et.add_argument("--ckpt", required=True)
    et.add_argument("--clips")
    et.add_argument("--seed", default=0)
    et.set_defaults(fn=cmd_eval_tracking)
    ev = esub.add_parser("traverse")
    ev.add_argument("--ckpt", required=True)
    ev.add_argument("--scenario", required=True)
    ev.add_argument("--episodes", default=100)
    ev.add_argument("--seed", default=0)
    ev.set_defaults(fn=cmd_eval_traverse)
    eo = esub.add_parser("tournament")
    eo.add_argument("--ckpts", nargs="+", required=True)
    eo.add_argument("--matches", default=100)
    eo.add_argument("--seed", default=0)
    eo.add_argument("--out")
    eo.set_defaults(fn=cmd_eval_tournament)

    g = sub.add_parser("gait", help="gait report from trajectories")
    g.add_argument("--trajectories", nargs="+", required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(fn=cmd_gait)

    s = sub.add_parser("serve", help="interactive play service")
    s.add_argument("--ckpt")
    s.add_argument("--port", default=8765)
    s.add_argument("--backend", choices=["proxy", "full"], default="proxy")
    s.set_defaults(fn=cmd_serve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
