"""25 Hz to 100 Hz trajectory alignment.

Positions and joint angles go through a natural cubic spline; rotations are
interpolated per interval along the geodesic of the relative rotation. K
input frames produce 4(K-1)+1 output frames and input samples are
reproduced exactly at shared timestamps.
"""

import numpy as np
from scipy.interpolate import CubicSpline

from ..kinematics import HandPose
from ..posefit import ObjectPose, PoseSequence
from ..retarget import RobotJointTrajectory
from ..so3 import continuous_log, exp_so3, log_so3
from ..transforms import RigidTransform

RATE_IN = 25.0
RATE_OUT = 100.0
UPSAMPLE = int(RATE_OUT / RATE_IN)


def output_grid(ts_in):
    k = len(ts_in)
    return ts_in[0] + np.arange(UPSAMPLE * (k - 1) + 1) / RATE_OUT


def _check_rate(ts):
    ts = np.asarray(ts, dtype=float)
    if len(ts) < 3:
        raise ValueError("need at least 3 frames to resample")
    dt = np.diff(ts)
    if np.any(np.abs(dt - 1.0 / RATE_IN) > 1e-6):
        raise ValueError("input must be sampled at 25 Hz")
    return ts


def resample_positions(ts_in, values, ts_out):
    cs = CubicSpline(ts_in, np.asarray(values, dtype=float), axis=0,
                     bc_type="natural")
    return cs(ts_out)


def resample_rotations(ts_in, rotations, ts_out):
    """Per-interval so(3) interpolation of relative rotations."""
    ts_in = np.asarray(ts_in, dtype=float)
    out = []
    for t in ts_out:
        k = int(np.clip(np.searchsorted(ts_in, t, side="right") - 1,
                        0, len(ts_in) - 2))
        s = (t - ts_in[k]) / (ts_in[k + 1] - ts_in[k])
        s = np.clip(s, 0.0, 1.0)
        rel = log_so3(rotations[k].T @ rotations[k + 1])
        out.append(rotations[k] @ exp_so3(s * rel))
    return out


def align_timesteps(traj):
    """Resample a 25 Hz PoseSequence or RobotJointTrajectory to 100 Hz."""
    if isinstance(traj, PoseSequence):
        return _align_pose_sequence(traj)
    if isinstance(traj, RobotJointTrajectory):
        return _align_robot_trajectory(traj)
    raise TypeError("expected PoseSequence or RobotJointTrajectory")


def _align_pose_sequence(seq: PoseSequence) -> PoseSequence:
    ts = _check_rate(seq.timestamps())
    ts_out = output_grid(ts)
    thetas = np.stack([h.theta for h in seq.hand_poses()])
    betas = np.stack([h.beta for h in seq.hand_poses()])
    roots_t = np.stack([h.root.translation for h in seq.hand_poses()])
    obj_t = np.stack([o.translation for o in seq.object_poses()])
    theta_o = resample_positions(ts, thetas, ts_out)
    beta_o = resample_positions(ts, betas, ts_out)
    root_to = resample_positions(ts, roots_t, ts_out)
    obj_to = resample_positions(ts, obj_t, ts_out)
    root_R = resample_rotations(ts, [h.root.rotation for h in seq.hand_poses()], ts_out)
    obj_R = resample_rotations(ts, [o.rotation for o in seq.object_poses()], ts_out)
    frames = []
    for i, t in enumerate(ts_out):
        hand = HandPose(theta_o[i], np.clip(beta_o[i], 0.501, 1.999),
                        RigidTransform(root_R[i], root_to[i]))
        frames.append((float(t), hand, ObjectPose(obj_R[i], obj_to[i])))
    return PoseSequence(frames, RATE_OUT)


def _align_robot_trajectory(traj: RobotJointTrajectory) -> RobotJointTrajectory:
    ts = _check_rate(traj.timestamps())
    ts_out = output_grid(ts)
    Q = traj.joint_matrix()
    lim = traj.tree.joint_limits()
    scalar_cols = np.r_[0:3, 6:traj.tree.dof]
    Qs = resample_positions(ts, Q[:, scalar_cols], ts_out)
    rots = [exp_so3(q[3:6]) for _, q in traj.frames]
    R_out = resample_rotations(ts, rots, ts_out)
    frames = []
    w_prev = Q[0, 3:6].copy()
    for i, t in enumerate(ts_out):
        q = np.zeros(traj.tree.dof)
        q[scalar_cols] = Qs[i]
        w = continuous_log(R_out[i], w_prev)
        w_prev = w
        q[3:6] = w
        q = np.clip(q, lim[:, 0], lim[:, 1])
        frames.append((float(t), q))
    return RobotJointTrajectory(frames, traj.tree)
