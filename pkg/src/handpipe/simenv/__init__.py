from .config import (CONTAINER, CONTROL_DT, MAX_INSIDE_FRACTION,
                     MUG_RECEPTACLE, N_PARTICLES, OBJECTS, TASKS, EnvConfig,
                     ObjectSpec, RewardWeights)
from .env import DeskEnv, EnvState, is_success_relocate, make_env
from .rewards import reward_pour, reward_relocate, reward_relocate_grad_hand
from .score import (analytic_capsule_below, capsule_volume_samples,
                    inside_fraction, inside_score, points_in_cylinder)

__all__ = [
    "CONTAINER", "CONTROL_DT", "DeskEnv", "EnvConfig", "EnvState",
    "MAX_INSIDE_FRACTION", "MUG_RECEPTACLE", "N_PARTICLES", "OBJECTS",
    "ObjectSpec", "RewardWeights", "TASKS", "analytic_capsule_below",
    "capsule_volume_samples", "inside_fraction", "inside_score",
    "is_success_relocate", "make_env", "points_in_cylinder", "reward_pour",
    "reward_relocate", "reward_relocate_grad_hand",
]
