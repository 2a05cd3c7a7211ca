"""Deterministic-policy evaluation: N trials per seed, mean and spread
across seeds, Table-style formatting."""

import re

import numpy as np

from .rollout import collect_rollouts
from .seeding import seed_for


def evaluate(policy, env_factory, trials=100, n_seeds=3, base_seed=0):
    """Mean-action rollouts; returns per-seed rates and the aggregate."""
    per_seed = []
    for s in range(n_seeds):
        trajs, _ = collect_rollouts(policy, env_factory, trials,
                                    seed_for(base_seed, "eval", s),
                                    deterministic=True)
        per_seed.append(float(np.mean([t.metric for t in trajs])))
    mean = float(np.mean(per_seed))
    std = float(np.std(per_seed))
    return {"per_seed": per_seed, "mean": mean, "std": std,
            "formatted": format_mean_std(mean, std)}


def format_mean_std(mean, std):
    return f"{mean:.2f} ± {std:.2f}"


def parse_mean_std(text):
    m = re.match(r"\s*([-+0-9.eE]+)\s*±\s*([-+0-9.eE]+)\s*$", text)
    if not m:
        raise ValueError(f"cannot parse {text!r}")
    return float(m.group(1)), float(m.group(2))
