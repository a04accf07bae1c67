"""Stage-3 self-play training with PFSP opponents on the proxy backend,
plus match playing used by the tournament evaluator and the CLI."""

from __future__ import annotations

import dataclasses
import io

import numpy as np

from ..ppo import PPOConfig, PPOTrainer, RolloutBatch, compute_gae
from .arena_sensors import arena_rays, proxy_proprio
from .game import (GameState, NavigationCommand, game_reward, new_game,
                   step_game, task_observation)
from .league import LeaguePool, pfsp_sample
from .policy import StrategicPolicy, action_to_command


def observe(state: GameState, agent_index: int) -> dict:
    return {"task": task_observation(state, agent_index),
            "proprio": proxy_proprio(state, agent_index),
            "rays": arena_rays(state, agent_index)}


def stack_obs(obs_list) -> dict:
    return {k: np.stack([o[k] for o in obs_list]) for k in obs_list[0]}


@dataclasses.dataclass
class SepmcTrainConfig:
    total_steps: int = 400_000
    n_envs: int = 16
    seed: int = 0
    ppo: PPOConfig = dataclasses.field(default_factory=lambda: PPOConfig(
        gamma=0.95, lam=0.95, clip=0.1, lr=1e-5, batch_size=32768))
    alpha2: float = 2.0
    snapshot_every: int = 50


class SelfPlayArena:
    """N concurrent games: learner in slot 0, PFSP opponents in slot 1."""

    def __init__(self, policy: StrategicPolicy, pool: LeaguePool, n_envs: int,
                 seed: int, alpha2: float):
        self.policy = policy
        self.pool = pool
        self.alpha2 = alpha2
        self.rng = np.random.default_rng(seed)
        self.n = n_envs
        self.games = []
        self.opponents = []
        self.opp_policy = StrategicPolicy(np.random.default_rng(0))
        self.learner_state = list(policy.initial_state(n_envs))
        self.opp_states = []
        self.match_log = []
        for _ in range(n_envs):
            self.games.append(new_game(self.rng))
            self.opponents.append(pfsp_sample(pool, self.rng, alpha2))
            h, c = self.opp_policy.initial_state(1)
            self.opp_states.append([h, c])
        self.role_swaps = np.zeros(n_envs, dtype=np.int64)

    def _reset_game(self, i: int):
        self.games[i] = new_game(self.rng)
        self.opponents[i] = pfsp_sample(self.pool, self.rng, self.alpha2)
        h, c = self.opp_policy.initial_state(1)
        self.opp_states[i] = [h, c]
        self.learner_state[0][i] = 0.0
        self.learner_state[1][i] = 0.0
        self.role_swaps[i] = 0

    def observe_learner(self) -> dict:
        obs = stack_obs([observe(g, 0) for g in self.games])
        obs["h"] = self.learner_state[0].copy()
        obs["c"] = self.learner_state[1].copy()
        return obs

    def _opponent_actions(self) -> np.ndarray:
        """Batch opponent inference per distinct checkpoint."""
        acts = np.empty((self.n, 2))
        groups: dict = {}
        for i, entry in enumerate(self.opponents):
            groups.setdefault(entry.checkpoint_id, []).append(i)
        for cid, idxs in groups.items():
            self.opp_policy.load_arrays(self.opponents[idxs[0]].arrays)
            obs = stack_obs([observe(self.games[i], 1) for i in idxs])
            h = np.concatenate([self.opp_states[i][0] for i in idxs])
            c = np.concatenate([self.opp_states[i][1] for i in idxs])
            a, _, _, (h2, c2) = self.opp_policy.act(obs, h, c, self.rng)
            for j, i in enumerate(idxs):
                acts[i] = a[j]
                self.opp_states[i] = [h2[j:j + 1], c2[j:j + 1]]
        return acts

    def step(self, actions: np.ndarray, new_hidden):
        """Advance all games one tick; returns (rewards, dones)."""
        self.learner_state[0] = new_hidden[0]
        self.learner_state[1] = new_hidden[1]
        rewards = np.zeros(self.n)
        dones = np.zeros(self.n, dtype=bool)
        opp_actions = self._opponent_actions()
        for i, game in enumerate(self.games):
            opp_entry = self.opponents[i]
            cmd_l = action_to_command(actions[i], game.agents[0].heading)
            cmd_o = action_to_command(opp_actions[i], game.agents[1].heading)
            _, events = step_game(game, [cmd_l, cmd_o], self.rng)
            self.role_swaps[i] += sum(1 for e in events if e["type"] == "role_swap")
            if game.result is not None:
                r = game_reward(game, 0)
                rewards[i] = r
                dones[i] = True
                score = 1.0 if r > 0 else (0.0 if r < 0 else 0.5)
                self.pool.record_result(opp_entry.checkpoint_id, score)
                self.match_log.append(
                    {"ticks": game.tick, "winner": game.result,
                     "role_swaps": int(self.role_swaps[i]),
                     "opponent": opp_entry.checkpoint_id})
                self._reset_game(i)
        return rewards, dones


def train_sepmc(cfg: SepmcTrainConfig, on_checkpoint=None, log_progress=None):
    """Returns (policy, pool, history). Snapshots go into the PFSP pool
    and to on_checkpoint(step, checkpoint_id, policy)."""
    rng = np.random.default_rng(cfg.seed)
    policy = StrategicPolicy(rng)
    pool = LeaguePool()
    pool.add("ckpt-0000", policy.state_arrays(), 0)
    arena = SelfPlayArena(policy, pool, cfg.n_envs, cfg.seed + 1, cfg.alpha2)
    trainer = PPOTrainer(policy, cfg.ppo)
    steps_per_iter = max(1, cfg.ppo.batch_size // cfg.n_envs)
    history = []
    recent_results = []
    step = 0
    update = 0
    if on_checkpoint:
        on_checkpoint(0, "ckpt-0000", policy)
    while step < cfg.total_steps:
        n = cfg.n_envs
        T = steps_per_iter
        obs_buf = {k: None for k in ("task", "proprio", "rays", "h", "c")}
        actions = np.empty((T, n, 2))
        log_probs = np.empty((T, n))
        rewards = np.empty((T, n))
        values = np.empty((T + 1, n))
        dones = np.empty((T, n))
        for t in range(T):
            obs = arena.observe_learner()
            for k in obs_buf:
                if obs_buf[k] is None:
                    obs_buf[k] = np.empty((T,) + obs[k].shape)
                obs_buf[k][t] = obs[k]
            act, lp, val, hidden = policy.act(obs, obs["h"], obs["c"], rng)
            r, done = arena.step(act, hidden)
            actions[t] = act
            log_probs[t] = lp
            values[t] = val
            rewards[t] = r
            dones[t] = done
            for res in ([m for m in arena.match_log[-int(done.sum()):]]
                        if done.any() else []):
                recent_results.append(1.0 if res["winner"] == "agent0" else
                                      (0.5 if res["winner"] == "draw" else 0.0))
        final_obs = arena.observe_learner()
        _, _, v_fin, _ = policy.act(final_obs, final_obs["h"], final_obs["c"],
                                    rng, deterministic=True)
        values[T] = v_fin
        adv, ret = compute_gae(rewards, values, gamma=cfg.ppo.gamma,
                               lam=cfg.ppo.lam, dones=dones)
        batch = RolloutBatch(
            obs={k: v.reshape((-1,) + v.shape[2:]) for k, v in obs_buf.items()},
            actions=actions.reshape(-1, 2), log_probs=log_probs.reshape(-1),
            rewards=rewards.reshape(-1), values=values[:T].reshape(-1),
            dones=dones.reshape(-1), advantages=adv.reshape(-1),
            returns=ret.reshape(-1))
        trainer.set_progress(step / cfg.total_steps)
        stats = trainer.update(batch, rng)
        step += len(batch)
        update += 1
        recent_results = recent_results[-200:]
        win_rate = float(np.mean(recent_results)) if recent_results else 0.5
        history.append({"step": step, "win_rate": win_rate,
                        "pool_size": len(pool), **stats})
        if log_progress:
            log_progress(history[-1])
        if update % cfg.snapshot_every == 0:
            cid = f"ckpt-{update:04d}"
            pool.add(cid, policy.state_arrays(), step)
            if on_checkpoint:
                on_checkpoint(step, cid, policy)
        if stats.get("aborted"):
            break
    return policy, pool, history


def play_match(arrays_a: dict, arrays_b: dict, seed: int,
               pinned_speed: float | None = None,
               deterministic: bool = False) -> dict:
    """One full game between two parameter sets.

    Returns {winner: 'a'|'b'|'draw', ticks, role_swaps, seed}.
    """
    rng = np.random.default_rng(seed)
    pol_a = StrategicPolicy(np.random.default_rng(0))
    pol_a.load_arrays(arrays_a)
    pol_b = StrategicPolicy(np.random.default_rng(0))
    pol_b.load_arrays(arrays_b)
    game = new_game(rng)
    ha, ca = pol_a.initial_state(1)
    hb, cb = pol_b.initial_state(1)
    swaps = 0
    while game.result is None:
        obs_a = stack_obs([observe(game, 0)])
        obs_b = stack_obs([observe(game, 1)])
        act_a, _, _, (ha, ca) = pol_a.act(obs_a, ha, ca, rng,
                                          deterministic=deterministic)
        act_b, _, _, (hb, cb) = pol_b.act(obs_b, hb, cb, rng,
                                          deterministic=deterministic)
        cmds = [action_to_command(act_a[0], game.agents[0].heading, pinned_speed),
                action_to_command(act_b[0], game.agents[1].heading, pinned_speed)]
        _, events = step_game(game, cmds, rng)
        swaps += sum(1 for e in events if e["type"] == "role_swap")
    winner = {"agent0": "a", "agent1": "b", "draw": "draw"}[game.result]
    return {"winner": winner, "ticks": game.tick, "role_swaps": swaps, "seed": seed}


def match_log_csv(records: list) -> str:
    out = io.StringIO()
    out.write("tick_count,winner,role_swaps,seed\n")
    for r in records:
        out.write(f"{r['ticks']},{r['winner']},{r['role_swaps']},{r.get('seed', '')}\n")
    return out.getvalue()
