"""Development probe for the learning acceptance runs: builds demos via the
fast ground-truth path, trains each algorithm briefly, prints success rates."""

import sys
import time

import numpy as np

from handpipe.cli.synthscene import script_scene
from handpipe.demogen import Demonstration, build_demonstration
from handpipe.ilearn import TrainConfig, evaluate, seed_for, train
from handpipe.kinematics import builtin_model
from handpipe.retarget import retarget_sequence
from handpipe.simenv import EnvConfig, make_env


def make_demos(cfg, n, master_seed, state_only=False, duration=2.0):
    human = builtin_model("human_hand")
    robot = builtin_model("robot_hand_30dof")
    demos = []
    for i in range(n):
        seed = seed_for(master_seed, "scene", i)
        seq = script_scene(cfg, seed, duration=duration)
        traj = retarget_sequence(seq, human, robot)
        demo, _ = build_demonstration(seq, traj, cfg.task, cfg.object_id,
                                      with_actions=not state_only)
        demos.append(demo)
    return demos


def replay_check(cfg, demos, master_seed):
    ok = 0
    for i, demo in enumerate(demos):
        env = make_env(cfg, 1)
        env.reset([seed_for(master_seed, "scene", i)])
        for a in demo.actions:
            env.step(a[None, :])
        d = np.linalg.norm(env.obj_pos[0] - env.target[0])
        ok += d < 0.05
    return ok


def main():
    iters = int(sys.argv[1]) if len(sys.argv) > 1 else 60
    algos = sys.argv[2].split(",") if len(sys.argv) > 2 else ["trpo", "dapg"]
    n_demos = 25
    cfg = EnvConfig(task="relocate", object_id="mug")
    t0 = time.time()
    demos = make_demos(cfg, n_demos, master_seed=900)
    print(f"built {n_demos} demos in {time.time()-t0:.0f}s; "
          f"replay ok {replay_check(cfg, demos, 900)}/{n_demos}")
    demos_so = [Demonstration(d.states, None, d.task, d.object_id, d.target)
                for d in demos]
    factory = lambda batch: make_env(cfg, batch)   # noqa: E731
    tc = TrainConfig(iterations=iters, trajectories_per_iter=50)
    for algo in algos:
        t0 = time.time()
        use = demos_so if algo == "soil" else ([] if algo == "trpo" else demos)
        res = train(algo, factory, 39, 30, tc, seed=seed_for(123, algo, 0),
                    demos=use)
        sr = [h["success_rate"] for h in res.history]
        ev = evaluate(res.policy, factory, trials=50, n_seeds=1, base_seed=5)
        print(f"{algo}: train {time.time()-t0:.0f}s "
              f"succ@[{iters//4},{iters//2},{iters}] = "
              f"{sr[iters//4-1]:.2f},{sr[iters//2-1]:.2f},{sr[-1]:.2f} "
              f"eval={ev['mean']:.2f}")


if __name__ == "__main__":
    main()
