"""Fast invariant suite behind the `verify` subcommand: one PASS/FAIL line
per check, nonzero exit on any failure."""

import numpy as np


def _check(name, fn):
    try:
        fn()
        print(f"PASS {name}")
        return True
    except Exception as exc:   # noqa: BLE001 - report and continue
        print(f"FAIL {name}: {exc}")
        return False


def run_verify():
    from ..demogen import (ServoParams, denormalize_action, lowpass,
                           servo_torque, torque_to_action)
    from ..kinematics import builtin_model, forward_kinematics, point_jacobian
    from ..posefit import ObjectKeypointSet, solve_object_pose
    from ..simenv import EnvConfig, make_env
    from ..so3 import exp_so3

    checks = []

    def procrustes_optimality():
        rng = np.random.default_rng(0)
        model = rng.uniform(-0.2, 0.2, size=(8, 3))
        R = exp_so3(rng.normal(size=3))
        T = rng.uniform(-0.3, 0.3, size=3)
        pred = model @ R.T + T + rng.normal(0, 1e-3, model.shape)
        pose, best = solve_object_pose(ObjectKeypointSet(model, pred))
        for _ in range(200):
            dR = exp_so3(rng.normal(size=3) * 0.05)
            cost = np.sum((pred - (model @ (dR @ pose.rotation).T
                                   + pose.translation + rng.normal(0, 2e-3, 3))) ** 2)
            assert cost >= best - 1e-12

    def jacobian_fd():
        tree = builtin_model("robot_hand_30dof")
        rng = np.random.default_rng(1)
        lim = tree.joint_limits()
        q = np.clip(rng.normal(0, 0.15, 30), lim[:, 0], lim[:, 1])
        link = tree.link_index("index_dist")
        J = point_jacobian(tree, q, link, [0.01, 0, 0])
        h = 1e-6
        for k in rng.choice(30, 8, replace=False):
            qp, qm = q.copy(), q.copy()
            qp[k] += h
            qm[k] -= h
            _, pp = forward_kinematics(tree, qp)
            _, pm = forward_kinematics(tree, qm)
            # offset along the link x axis
            Rp = forward_kinematics(tree, qp)[0][link]
            Rm = forward_kinematics(tree, qm)[0][link]
            fd = ((pp[link] + Rp @ [0.01, 0, 0]) - (pm[link] + Rm @ [0.01, 0, 0])) / (2 * h)
            assert np.max(np.abs(J[:, k] - fd)) < 1e-5

    def filter_dc_and_linearity():
        x = np.full(120, 3.7)
        assert np.max(np.abs(lowpass(x) - x)) < 1e-10
        rng = np.random.default_rng(2)
        a = rng.normal(size=130)
        b = rng.normal(size=130)
        lhs = lowpass(1.3 * a - 0.7 * b)
        rhs = 1.3 * lowpass(a) - 0.7 * lowpass(b)
        assert np.max(np.abs(lhs - rhs)) < 1e-10

    def servo_roundtrip():
        tree = builtin_model("robot_hand_30dof")
        servo = ServoParams.from_tree(tree)
        rng = np.random.default_rng(3)
        q = np.clip(rng.normal(0, 0.1, 30), servo.lo + 0.05, servo.hi - 0.05)
        tau = rng.normal(0, 3.0, 30)
        a, nclip = torque_to_action(tau, q, servo)
        assert nclip == 0
        back = servo_torque(q, denormalize_action(a, servo), servo)
        assert np.max(np.abs(back - tau)) < 1e-9

    def env_determinism():
        cfg = EnvConfig(task="relocate")
        acts = np.random.default_rng(4).uniform(-1, 1, (20, 30))
        outs = []
        for _ in range(2):
            env = make_env(cfg)
            env.reset([77])
            tot = 0.0
            for a in acts:
                _, r, _, _ = env.step(a[None, :])
                tot += r[0]
            outs.append(tot)
        assert outs[0] == outs[1]

    def observation_dims():
        assert make_env(EnvConfig(task="relocate")).reset([0]).shape[1] == 39
        assert make_env(EnvConfig(task="pour")).reset([0]).shape[1] == 43

    checks.append(_check("procrustes-optimality", procrustes_optimality))
    checks.append(_check("jacobian-finite-difference", jacobian_fd))
    checks.append(_check("filter-dc-linearity", filter_dc_and_linearity))
    checks.append(_check("servo-action-roundtrip", servo_roundtrip))
    checks.append(_check("env-determinism", env_determinism))
    checks.append(_check("observation-dims", observation_dims))
    return all(checks)
