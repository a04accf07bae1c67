"""Historical-opponent pool with prioritized fictitious self-play
sampling and round-robin Elo evaluation."""

from __future__ import annotations

import collections
import dataclasses

import numpy as np

WIN_WINDOW = 100
ELO_K = 16.0
ELO_PASSES = 20
ELO_ANCHOR = 1200.0


@dataclasses.dataclass
class PoolEntry:
    checkpoint_id: str
    arrays: dict
    step: int


class LeaguePool:
    """Frozen snapshots plus empirical win probabilities against each."""

    def __init__(self):
        self.entries: list = []
        self.results: dict = {}

    def __len__(self):
        return len(self.entries)

    def add(self, checkpoint_id: str, arrays: dict, step: int):
        self.entries.append(PoolEntry(checkpoint_id, arrays, step))
        self.results[checkpoint_id] = collections.deque(maxlen=WIN_WINDOW)

    def record_result(self, checkpoint_id: str, score: float):
        """score from the learner's perspective: 1 win, 0 loss, 0.5 draw."""
        self.results[checkpoint_id].append(float(score))

    def win_probability(self, checkpoint_id: str) -> float:
        window = self.results.get(checkpoint_id)
        if not window:
            return 0.5
        return float(np.mean(window))

    def win_probabilities(self) -> np.ndarray:
        return np.array([self.win_probability(e.checkpoint_id) for e in self.entries])


def pfsp_weights(win_probs: np.ndarray, alpha: float = 2.0) -> np.ndarray:
    p = np.clip(np.asarray(win_probs, dtype=np.float64), 0.0, 1.0)
    w = (1.0 - p) ** alpha
    total = w.sum()
    if total <= 0.0:
        return np.full(len(p), 1.0 / len(p))
    return w / total


def pfsp_sample(pool: LeaguePool, rng: np.random.Generator,
                alpha: float = 2.0) -> PoolEntry:
    if len(pool) == 0:
        raise ValueError("opponent pool is empty")
    weights = pfsp_weights(pool.win_probabilities(), alpha)
    return pool.entries[int(rng.choice(len(pool), p=weights))]


def fit_elo(match_results: list, player_ids: list,
            rng: np.random.Generator) -> dict:
    """Iterated Elo: K=16, 20 passes over the shuffled match list,
    ratings re-anchored to mean 1200. match_results entries are
    (id_a, id_b, score_a) with draws scoring 0.5."""
    ratings = {pid: ELO_ANCHOR for pid in player_ids}
    matches = list(match_results)
    for _ in range(ELO_PASSES):
        order = rng.permutation(len(matches))
        for k in order:
            a, b, score = matches[k]
            ea = 1.0 / (1.0 + 10.0 ** ((ratings[b] - ratings[a]) / 400.0))
            eb = 1.0 - ea
            ratings[a] += ELO_K * (score - ea)
            ratings[b] += ELO_K * ((1.0 - score) - eb)
    mean = np.mean(list(ratings.values()))
    return {pid: r - mean + ELO_ANCHOR for pid, r in ratings.items()}


def run_tournament(player_ids: list, play_match, matches_per_pair: int = 100,
                   rng: np.random.Generator | None = None) -> list:
    """Round-robin evaluation.

    play_match(id_a, id_b, rng) -> score for id_a in {1, 0, 0.5}. Returns
    rows of {checkpoint_id, rating, games} sorted by rating descending.
    """
    if len(player_ids) < 2:
        raise ValueError("tournament needs at least 2 checkpoints")
    rng = rng or np.random.default_rng(0)
    results = []
    games = {pid: 0 for pid in player_ids}
    for i, a in enumerate(player_ids):
        for b in player_ids[i + 1:]:
            for _ in range(matches_per_pair):
                score = float(play_match(a, b, rng))
                results.append((a, b, score))
                games[a] += 1
                games[b] += 1
    ratings = fit_elo(results, player_ids, rng)
    table = [{"checkpoint_id": pid, "rating": ratings[pid], "games": games[pid]}
             for pid in player_ids]
    table.sort(key=lambda r: -r["rating"])
    return table


def tournament_csv(table: list) -> str:
    lines = ["checkpoint_id,rating,games"]
    for row in table:
        lines.append(f"{row['checkpoint_id']},{row['rating']:.1f},{row['games']}")
    return "\n".join(lines) + "\n"
