from .arena_sensors import arena_rays, proxy_proprio
from .game import (ARENA, CATCH_DISTANCE, CHASER, EVADER, FLAG_DISTANCE,
                   GameState, MAX_TICKS, NavigationCommand, Obstacle,
                   TASK_OBS_DIM, default_obstacles, game_reward, new_game,
                   step_game, task_observation)
from .league import (LeaguePool, fit_elo, pfsp_sample, pfsp_weights,
                     run_tournament, tournament_csv)
from .policy import StrategicPolicy, action_to_command
from .train import (SelfPlayArena, SepmcTrainConfig, match_log_csv, observe,
                    play_match, train_sepmc)

__all__ = [
    "arena_rays", "proxy_proprio",
    "ARENA", "CATCH_DISTANCE", "CHASER", "EVADER", "FLAG_DISTANCE",
    "GameState", "MAX_TICKS", "NavigationCommand", "Obstacle", "TASK_OBS_DIM",
    "default_obstacles", "game_reward", "new_game", "step_game",
    "task_observation",
    "LeaguePool", "fit_elo", "pfsp_sample", "pfsp_weights", "run_tournament",
    "tournament_csv",
    "StrategicPolicy", "action_to_command",
    "SelfPlayArena", "SepmcTrainConfig", "match_log_csv", "observe",
    "play_match", "train_sepmc",
]
