"""Training orchestration for TRPO and the demonstration-augmented
algorithms, with per-iteration CSV metrics and parameter checkpoints."""

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .algos import dapg_gradient, gail_plus_reward, gail_update, soil_update
from .gae import gae_advantages
from .nets import Discriminator, GaussianMlpPolicy, InverseModel, ValueMlp
from .rollout import Trajectory, batch_arrays, collect_rollouts
from .seeding import rng_for, seed_for
from .trpo import trpo_update

ALGOS = ("trpo", "dapg", "gailplus", "soil")


@dataclass
class TrainConfig:
    gamma: float = 0.995
    gae_lambda: float = 0.97
    kl_limit: float = 0.01
    cg_iters: int = 10
    cg_damping: float = 0.1
    trajectories_per_iter: int = 200
    iterations: int = 100
    lam0: float = 0.1
    lam1: float = 0.95
    w_g: float = 0.1
    hidden: tuple = (64, 64)
    log_std_init: float = -1.0
    value_epochs: int = 10
    value_lr: float = 1e-3
    value_batch: int = 256
    disc_steps: int = 5
    disc_lr: float = 1e-3
    inv_epochs: int = 3
    inv_lr: float = 1e-3
    inv_batch: int = 256

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise ValueError("gamma must lie in (0, 1)")
        if not (0.0 <= self.lam0 < 1.0 and 0.0 <= self.lam1 < 1.0):
            raise ValueError("lam0 and lam1 must lie in [0, 1)")


@dataclass
class TrainResult:
    policy: GaussianMlpPolicy
    value: ValueMlp
    history: list = field(default_factory=list)


def demos_to_arrays(demos, require_actions):
    """Stacked (obs, act) pairs or the per-demo state lists for SOIL."""
    if require_actions:
        for d in demos:
            if d.actions is None:
                raise ValueError("this algorithm needs state-action demos")
        obs = np.concatenate([d.states[:-1] for d in demos])
        act = np.concatenate([d.actions for d in demos])
        return obs, act
    for d in demos:
        if d.actions is not None:
            raise ValueError("SOIL expects state-only demonstrations")
    return [d.states for d in demos]


def train(algo, env_factory, obs_dim, act_dim, cfg: TrainConfig, seed,
          demos=(), metrics_path=None, policy=None, value=None,
          iteration_hook=None):
    """Run `cfg.iterations` updates of `algo`; returns TrainResult.

    env_factory(batch) must build a fresh batched environment. All
    randomness derives from `seed` through labeled streams, so two runs
    with the same arguments produce bit-identical parameters.
    """
    if algo not in ALGOS:
        raise ValueError(f"unknown algorithm {algo!r}")
    policy = policy or GaussianMlpPolicy(
        obs_dim, act_dim, cfg.hidden, cfg.log_std_init,
        rng=rng_for(seed, "policy-init"))
    value = value or ValueMlp(obs_dim, cfg.hidden, rng=rng_for(seed, "value-init"))

    demo_obs = demo_act = None
    demo_states = None
    disc = None
    inv = None
    if algo in ("dapg", "gailplus"):
        demo_obs, demo_act = demos_to_arrays(demos, require_actions=True)
    if algo == "gailplus":
        disc = Discriminator(obs_dim, act_dim, cfg.hidden,
                             rng=rng_for(seed, "disc-init"))
    if algo == "soil":
        demo_states = demos_to_arrays(demos, require_actions=False)
        inv = InverseModel(obs_dim, act_dim, cfg.hidden,
                           rng=rng_for(seed, "inv-init"))

    history = []
    writer = None
    fh = None
    if metrics_path:
        fh = open(metrics_path, "w", newline="", encoding="utf-8")
        writer = csv.writer(fh)
        writer.writerow(["iteration", "mean_return", "success_rate", "kl",
                         "clip_rate", "wall_time"])
    t_start = time.time()
    try:
        for k in range(cfg.iterations):
            trajs, stats = collect_rollouts(
                policy, env_factory, cfg.trajectories_per_iter,
                seed_for(seed, "rollout", k))
            batch = batch_arrays(trajs)

            if algo == "gailplus":
                gail_update(disc, batch["obs"], batch["act"], demo_obs,
                            demo_act, rng_for(seed, "disc", k),
                            steps=cfg.disc_steps, lr=cfg.disc_lr)
                d_vals = disc.prob(batch["obs"], batch["act"])
                off = 0
                shaped = []
                for t in trajs:
                    dv = d_vals[off:off + len(t)]
                    off += len(t)
                    shaped.append(Trajectory(t.obs, t.actions,
                                             gail_plus_reward(t.rewards, dv, cfg.w_g),
                                             t.log_probs, t.terminal, t.metric))
                trajs = shaped

            adv, targets = gae_advantages(trajs, value.value, cfg.gamma,
                                          cfg.gae_lambda)

            gradient = None
            if algo in ("dapg", "soil"):
                if algo == "soil":
                    filled_obs, filled_act, inv_mse = soil_update(
                        inv, batch["trans_s"], batch["trans_s_next"],
                        batch["trans_a"], demo_states,
                        rng_for(seed, "inv", k), epochs=cfg.inv_epochs,
                        batch=cfg.inv_batch, lr=cfg.inv_lr)
                    d_obs, d_act = filled_obs, filled_act
                else:
                    d_obs, d_act = demo_obs, demo_act
                gradient = dapg_gradient(policy, batch["obs"], batch["act"],
                                         adv, d_obs, d_act, k, cfg.lam0,
                                         cfg.lam1)

            diag = trpo_update(policy, batch["obs"], batch["act"], adv,
                               batch["logp"], gradient=gradient,
                               kl_limit=cfg.kl_limit, cg_iters=cfg.cg_iters,
                               cg_damping=cfg.cg_damping)
            value.fit(batch["obs"], targets, epochs=cfg.value_epochs,
                      batch=cfg.value_batch, lr=cfg.value_lr,
                      rng=rng_for(seed, "value", k))

            row = dict(iteration=k, mean_return=stats["mean_return"],
                       success_rate=stats["mean_metric"], kl=diag.kl,
                       clip_rate=stats["clip_rate"],
                       wall_time=time.time() - t_start)
            history.append(row)
            if writer:
                writer.writerow([row["iteration"], row["mean_return"],
                                 row["success_rate"], row["kl"],
                                 row["clip_rate"], row["wall_time"]])
                fh.flush()
            if iteration_hook:
                iteration_hook(k, policy, row)
    finally:
        if fh:
            fh.close()
    return TrainResult(policy, value, history)


CHECKPOINT_VERSION = 1


def save_policy(path, policy: GaussianMlpPolicy):
    np.savez(path, version=CHECKPOINT_VERSION, obs_dim=policy.obs_dim,
             act_dim=policy.act_dim,
             hidden=np.asarray(policy.mean_net.sizes[1:-1]),
             flat=policy.get_flat())


def load_policy(path) -> GaussianMlpPolicy:
    data = np.load(path)
    if int(data["version"]) != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version")
    policy = GaussianMlpPolicy(int(data["obs_dim"]), int(data["act_dim"]),
                               tuple(int(h) for h in data["hidden"]))
    policy.set_flat(data["flat"])
    return policy
