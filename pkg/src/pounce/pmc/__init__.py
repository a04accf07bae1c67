from .env import (CONTINUE, DEVIATION, END_OF_CLIP, FALL, PmcEnv,
                  clip_probabilities, eligible_start_frames, init_episode,
                  prioritized_sample, should_terminate)
from .obs import (FUTURE_DIM, FUTURE_HORIZONS, OBS_VERSION, PROPRIO_DIM,
                  ProprioBuffer, future_targets, per_step_state)
from .policy import PmcPolicy
from .reward import WEIGHTS, toe_positions_base, tracking_reward, tracking_reward_terms
from .train import PmcTrainConfig, evaluate_tracking, train_pmc

__all__ = [
    "CONTINUE", "DEVIATION", "END_OF_CLIP", "FALL", "PmcEnv",
    "clip_probabilities", "eligible_start_frames", "init_episode",
    "prioritized_sample", "should_terminate",
    "FUTURE_DIM", "FUTURE_HORIZONS", "OBS_VERSION", "PROPRIO_DIM",
    "ProprioBuffer", "future_targets", "per_step_state",
    "PmcPolicy", "WEIGHTS", "toe_positions_base", "tracking_reward",
    "tracking_reward_terms", "PmcTrainConfig", "evaluate_tracking", "train_pmc",
]
