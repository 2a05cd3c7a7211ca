"""Generalized advantage estimation over fixed-horizon trajectories."""

import numpy as np


def gae_advantages(trajectories, value_fn, gamma=0.995, lam=0.97,
                   normalize=True):
    """Per-step advantages and value-regression targets.

    Each trajectory provides obs (T, d), rewards (T,), and a terminal flag
    at the horizon (no bootstrap past termination). Advantages are
    normalized to zero mean / unit variance over the whole batch unless
    disabled; targets stay unnormalized.
    """
    all_adv, all_targets = [], []
    for traj in trajectories:
        r = traj.rewards
        v = value_fn(traj.obs) if callable(value_fn) else value_fn
        T = len(r)
        adv = np.zeros(T)
        last = 0.0
        for t in range(T - 1, -1, -1):
            v_next = v[t + 1] if t + 1 < T else 0.0
            nonterminal = 0.0 if (t == T - 1 and traj.terminal) else 1.0
            delta = r[t] + gamma * v_next * nonterminal - v[t]
            last = delta + gamma * lam * nonterminal * last
            adv[t] = last
        all_adv.append(adv)
        all_targets.append(adv + v[:T])
    adv = np.concatenate(all_adv)
    targets = np.concatenate(all_targets)
    if normalize:
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    return adv, targets
