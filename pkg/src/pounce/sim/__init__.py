from .config import GRAVITY, HIP_X, LEG_NAMES, N_JOINTS, N_LEGS, SimConfig
from .engine import (BatchState, RobotState, SimFault, fallen_mask, is_fallen,
                     joint_limits, leg_geometry, pd_torque, policy_step,
                     standing_state, step, total_energy)
from .randomize import (EVAL_TORQUE_LIMIT, RandomizationSpec,
                        evaluation_randomization, sample_randomization)
from .sensors import Exteroception, exteroception
from .terrain import (KINDS, TerrainSpec, flat_terrain, generate_terrain,
                      parse_terrain, serialize_terrain)

__all__ = [
    "GRAVITY", "HIP_X", "LEG_NAMES", "N_JOINTS", "N_LEGS", "SimConfig",
    "BatchState", "RobotState", "SimFault", "fallen_mask", "is_fallen",
    "joint_limits", "leg_geometry", "pd_torque", "policy_step",
    "standing_state", "step", "total_energy",
    "EVAL_TORQUE_LIMIT", "RandomizationSpec", "evaluation_randomization",
    "sample_randomization",
    "Exteroception", "exteroception",
    "KINDS", "TerrainSpec", "flat_terrain", "generate_terrain",
    "parse_terrain", "serialize_terrain",
]
