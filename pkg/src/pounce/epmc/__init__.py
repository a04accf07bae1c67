from .distill import (DistillConfig, TeacherSet, distill, heldout_kl,
                      kl_categorical, kl_value)
from .env import SCENARIOS, SPARSE_SCENARIOS, EpmcEnv, sample_speed
from .gail import (Discriminator, collect_expert_pairs, gail_reward,
                   gail_update, GAIL_REWARD_CAP)
from .policy import EpmcPolicy
from .rewards import (command_reward, fall_recovery_reward,
                      nav_direction_reward, nav_speed_reward,
                      stair_edge_penalty)
from .train import EpmcTrainConfig, build_policy, evaluate_epmc, train_epmc

__all__ = [
    "DistillConfig", "TeacherSet", "distill", "heldout_kl", "kl_categorical",
    "kl_value",
    "SCENARIOS", "SPARSE_SCENARIOS", "EpmcEnv", "sample_speed",
    "Discriminator", "collect_expert_pairs", "gail_reward", "gail_update",
    "GAIL_REWARD_CAP",
    "EpmcPolicy",
    "command_reward", "fall_recovery_reward", "nav_direction_reward",
    "nav_speed_reward", "stair_edge_penalty",
    "EpmcTrainConfig", "build_policy", "evaluate_epmc", "train_epmc",
]
