"""On-policy rollout collection.

Episodes run in lockstep batches (every environment op is per-row, every
policy forward pass is padded to a fixed width), per-episode seeds and
exploration noise derive from the master seed by label, so the collected
trajectories are identical regardless of chunking or worker count.
"""

from dataclasses import dataclass, field

import numpy as np

from .seeding import rng_for, seed_for

CHUNK = 64


@dataclass
class Trajectory:
    obs: np.ndarray          # (T, obs_dim)
    actions: np.ndarray      # (T, act_dim)
    rewards: np.ndarray      # (T,)
    log_probs: np.ndarray    # (T,)
    terminal: bool = True
    metric: float = 0.0      # task success / fraction / score at the end
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.rewards)


def collect_rollouts(policy, env_factory, n, seed, deterministic=False,
                     chunk=CHUNK):
    """n complete episodes; returns (trajectories, stats dict)."""
    if n < 1:
        raise ValueError("need at least one episode")
    trajs = []
    clip_count = 0
    for start in range(0, n, chunk):
        count = min(chunk, n - start)
        env = env_factory(count)
        horizon = env.cfg.horizon
        act_dim = 30
        ep_seeds = [seed_for(seed, "episode", start + i) for i in range(count)]
        noise = np.stack([
            rng_for(seed, "noise", start + i).normal(size=(horizon, act_dim))
            for i in range(count)])
        obs = env.reset(ep_seeds)
        obs_buf = np.zeros((count, horizon, obs.shape[1]))
        act_buf = np.zeros((count, horizon, act_dim))
        rew_buf = np.zeros((count, horizon))
        logp_buf = np.zeros((count, horizon))
        attached_any = np.zeros(count, dtype=bool)
        for t in range(horizon):
            if deterministic:
                a = policy.act(obs)
            else:
                a = policy.act(obs, noise[:, t, :])
            logp = policy.log_prob_rows(obs, a)
            obs_buf[:, t] = obs
            act_buf[:, t] = a
            logp_buf[:, t] = logp
            obs, r, done, info = env.step(a)
            rew_buf[:, t] = r
            clip_count += info["clip_count"]
            attached_any |= info["attached"]
        attach_total = int(attached_any.sum())
        metrics = env.final_metric()
        for i in range(count):
            trajs.append(Trajectory(obs_buf[i], act_buf[i], rew_buf[i],
                                    logp_buf[i], True, float(metrics[i])))
    total_entries = sum(t.actions.size for t in trajs)
    stats = {
        "mean_return": float(np.mean([t.rewards.sum() for t in trajs])),
        "mean_metric": float(np.mean([t.metric for t in trajs])),
        "clip_count": clip_count,
        "clip_rate": clip_count / float(total_entries),
    }
    return trajs, stats


def batch_arrays(trajs):
    """Stack trajectories into flat (N, ...) arrays plus transition pairs."""
    obs = np.concatenate([t.obs for t in trajs])
    act = np.concatenate([t.actions for t in trajs])
    logp = np.concatenate([t.log_probs for t in trajs])
    s = np.concatenate([t.obs[:-1] for t in trajs])
    s_next = np.concatenate([t.obs[1:] for t in trajs])
    a_trans = np.concatenate([t.actions[:-1] for t in trajs])
    return dict(obs=obs, act=act, logp=logp,
                trans_s=s, trans_s_next=s_next, trans_a=a_trans)
