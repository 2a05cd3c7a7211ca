"""Assemble simulator-ready demonstrations from fitted and retargeted
trajectories: 100 Hz alignment, zero-phase filtering, state layout per task,
and optionally servo actions from spline-differentiated inverse dynamics.

State layouts (shared with the simulator's observation builder):
  relocate:      [q (30), hand root position (3), object position (3),
                  target position (3)]                       -> 39
  pour / place_inside: [q (30), hand root position (3), object position (3),
                  object quaternion wxyz (4), container position (3)] -> 43
"""

import numpy as np

from ..retarget import RobotJointTrajectory
from ..so3 import continuous_log, exp_so3, quat_from_matrix
from .actions import ServoParams
from .filters import lowpass, so3_lowpass
from .resample import align_timesteps
from .rnea import (coordinate_rates_to_joint, inverse_dynamics_batch,
                   joint_torque_to_coordinates)
from .spline import fit_minjerk
from .types import Demonstration

STATE_DIM = {"relocate": 39, "pour": 43, "place_inside": 43}


def assemble_state(task, q, obj_pos, obj_rot, target, container_pos):
    root_pos = q[0:3]
    if task == "relocate":
        return np.concatenate([q, root_pos, obj_pos, target])
    if task in ("pour", "place_inside"):
        quat = quat_from_matrix(obj_rot)
        return np.concatenate([q, root_pos, obj_pos, quat, container_pos])
    raise ValueError(f"unknown task {task!r}")


def filter_joint_matrix(Q, tree, fs=100.0, fc=5.0):
    """Low-pass all scalar columns; the root rotation block goes through the
    rotation-sequence filter."""
    scalar_cols = np.r_[0:3, 6:tree.dof]
    out = Q.copy()
    out[:, scalar_cols] = lowpass(Q[:, scalar_cols], fs, fc)
    rots = so3_lowpass([exp_so3(q[3:6]) for q in Q], fs, fc)
    w_prev = Q[0, 3:6].copy()
    for i, R in enumerate(rots):
        w = continuous_log(R, w_prev)
        out[i, 3:6] = w
        w_prev = w
    lim = tree.joint_limits()
    return np.clip(out, lim[:, 0], lim[:, 1])


def build_demonstration(seq, robot_traj, task, object_id, with_actions,
                        container_pos=None, fs=100.0, fc=5.0,
                        demo_gravity=(0.0, 0.0, 0.0)):
    """Returns (Demonstration, report dict).

    seq and robot_traj must share 25 Hz timestamps; both are aligned to
    100 Hz here, then filtered. Demo torques use zero gravity plus the
    servo's viscous damping as feedforward, matching the simulator's
    gravity-compensated robot model, so open-loop replay tracks.
    """
    tree = robot_traj.tree
    if task not in STATE_DIM:
        raise ValueError(f"unknown task {task!r}")
    if len(seq) != len(robot_traj):
        raise ValueError("sequence/trajectory length mismatch")
    if np.max(np.abs(seq.timestamps() - robot_traj.timestamps())) > 1e-9:
        raise ValueError("sequence/trajectory timestamps must align")
    if task in ("pour", "place_inside"):
        if container_pos is None:
            raise ValueError(f"{task} demos need the container position")
        container_pos = np.asarray(container_pos, dtype=float)

    seq100 = align_timesteps(seq)
    traj100 = align_timesteps(robot_traj)
    ts = traj100.timestamps()

    Q = filter_joint_matrix(traj100.joint_matrix(), tree, fs, fc)
    obj_T = lowpass(np.stack([o.translation for o in seq100.object_poses()]), fs, fc)
    obj_R = so3_lowpass([o.rotation for o in seq100.object_poses()], fs, fc)

    target = obj_T[-1].copy() if task == "relocate" else None
    states = np.stack([
        assemble_state(task, Q[i], obj_T[i], obj_R[i], target, container_pos)
        for i in range(len(ts))])

    actions = None
    report = {"task": task, "object": object_id, "frames": len(ts),
              "clip_count": 0, "clip_rate": 0.0}
    if with_actions:
        servo = ServoParams.from_tree(tree)
        spline = fit_minjerk(ts, Q)
        te = ts[:-1]
        Qs = spline.position(te)
        Qd = spline.velocity(te)
        Qdd = spline.acceleration(te)
        Qd_j = Qd.copy()
        Qdd_j = Qdd.copy()
        for i in range(len(te)):
            Qd_j[i], Qdd_j[i] = coordinate_rates_to_joint(tree, Qs[i], Qd[i],
                                                          Qdd[i])
        tau = inverse_dynamics_batch(tree, Qs, Qd_j, Qdd_j,
                                     gravity=demo_gravity)
        for i in range(len(te)):
            tau[i] = joint_torque_to_coordinates(tree, Qs[i], tau[i])
        tau = tau + servo.kd * Qd
        target = Q[:-1] + tau / servo.kp
        norm = 2.0 * (target - servo.lo) / servo.span - 1.0
        clip_total = int(np.sum(np.abs(norm) > 1.0))
        actions = np.clip(norm, -1.0, 1.0)
        report["clip_count"] = clip_total
        report["clip_rate"] = clip_total / float(actions.size)

    demo = Demonstration(states, actions, task, object_id, target)
    return demo, report
