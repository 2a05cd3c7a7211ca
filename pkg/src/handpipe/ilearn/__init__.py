from .algos import dapg_gradient, gail_plus_reward, gail_update, soil_fill_demos, soil_update
from .evaluate import evaluate, format_mean_std, parse_mean_std
from .gae import gae_advantages
from .nets import (Adam, Discriminator, GaussianMlpPolicy, InverseModel, Mlp,
                   ValueMlp)
from .rollout import Trajectory, batch_arrays, collect_rollouts
from .seeding import rng_for, seed_for
from .trainer import (ALGOS, TrainConfig, TrainResult, demos_to_arrays,
                      load_policy, save_policy, train)
from .trpo import TrpoDiagnostics, conjugate_gradient, surrogate, trpo_update

__all__ = [
    "ALGOS", "Adam", "Discriminator", "GaussianMlpPolicy", "InverseModel",
    "Mlp", "TrainConfig", "TrainResult", "Trajectory", "TrpoDiagnostics",
    "ValueMlp", "batch_arrays", "collect_rollouts", "conjugate_gradient",
    "dapg_gradient", "demos_to_arrays", "evaluate", "format_mean_std",
    "gae_advantages", "gail_plus_reward", "gail_update", "load_policy",
    "parse_mean_std", "rng_for", "save_policy", "seed_for",
    "soil_fill_demos", "soil_update", "surrogate", "train", "trpo_update",
]
