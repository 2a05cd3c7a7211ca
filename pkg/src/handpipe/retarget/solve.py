"""Map human hand pose sequences onto the robot hand.

Per frame we minimize, over the 24 revolute joints inside box limits,

    sum_i || v_i_target - v_i_robot(q) ||^2 / s^2  +  alpha * ||q - q_last||^2

with s = 1 mm as the vector matching tolerance, seeded at q_init and solved
by projected damped Gauss-Newton. At this scale the temporal term acts as a
tie-break along directions the vectors do not constrain (near-straight
fingers make proximal and distal flexions first-order interchangeable); it
never competes with attainable vector accuracy. The hand root (free joint)
carries no task-space information, so the robot root is set by rigidly
copying the human root transform.
"""

import numpy as np

from ..kinematics.fk import fk_full, points_jacobian
from ..optim import box_lm
from ..so3 import continuous_log, log_so3
from .tsv import tsv_human
from .types import RobotJointTrajectory, TaskSpaceVectors

TSV_SCALE = 0.001     # meters; residuals measured in millimeter units
DEFAULT_ALPHA = 8e-3
_REV = slice(6, 30)   # revolute block of the 30-vector


def _site_points(tree):
    names = ([tree.meta["wrist_site"]] + list(tree.meta["tsv_proximal_sites"])
             + list(tree.meta["tsv_tip_sites"]))
    return [(tree.site(n).link, tree.site(n).offset) for n in names]


def init_linear_map(tree, pose) -> np.ndarray:
    """Frame-0 seed: route each robot revolute joint from one human
    ball-joint component; root copied from the hand root transform.
    Output is clamped to the joint limits."""
    q = np.zeros(tree.dof)
    q[0:3] = pose.root.translation
    q[3:6] = log_so3(pose.root.rotation)
    theta = pose.theta
    for name, (fi, ji, ci) in tree.meta["linear_map"].items():
        jidx = tree.joint_index(name)
        q[tree.q_slices[jidx].start] = theta[9 * fi + 3 * ji + ci]
    lim = tree.joint_limits()
    return np.clip(q, lim[:, 0], lim[:, 1])


def retarget_frame(tree, target: TaskSpaceVectors, q_last, alpha=DEFAULT_ALPHA,
                   q_init=None, max_iter=100, grad_tol=1e-6):
    """Solve one frame; returns the full 30-vector with the root copied from
    q_init (the root block is not observable from task-space vectors)."""
    q_last = np.asarray(q_last, dtype=float)
    if q_init is None:
        q_init = q_last
    q_init = np.asarray(q_init, dtype=float)
    lim = tree.joint_limits()
    pts = _site_points(tree)
    root = np.clip(q_init[0:6], lim[0:6, 0], lim[0:6, 1])
    tgt = target.vectors
    sa = np.sqrt(alpha)

    def fun(x, need_jac):
        q = np.concatenate([root, x])
        fk = fk_full(tree, q)
        rt = fk.rotations[tree.root].T
        if need_jac:
            pos, J = points_jacobian(tree, q, pts, fk=fk)
        else:
            pos = np.array([fk.positions[l] + fk.rotations[l] @ o for l, o in pts])
            J = None
        wrist, prox, tip = pos[0], pos[1:6], pos[6:11]
        res = np.zeros(30)
        for f in range(5):
            res[6 * f:6 * f + 3] = rt @ (prox[f] - wrist) - tgt[2 * f]
            res[6 * f + 3:6 * f + 6] = rt @ (tip[f] - prox[f]) - tgt[2 * f + 1]
        res /= TSV_SCALE
        r = np.concatenate([res, sa * (x - q_last[_REV])])
        if not np.all(np.isfinite(r)):
            raise FloatingPointError("non-finite retargeting objective")
        if not need_jac:
            return (r,)
        Jr = np.zeros((54, 24))
        for f in range(5):
            Jp = rt @ (J[1 + f][:, _REV] - J[0][:, _REV])
            Jt = rt @ (J[6 + f][:, _REV] - J[1 + f][:, _REV])
            Jr[6 * f:6 * f + 3, :] = Jp / TSV_SCALE
            Jr[6 * f + 3:6 * f + 6, :] = Jt / TSV_SCALE
        Jr[30:, :] = sa * np.eye(24)
        return r, Jr

    x0 = np.clip(q_init[_REV], lim[_REV, 0], lim[_REV, 1])
    x, info = box_lm(fun, x0, lim[_REV, 0], lim[_REV, 1],
                     max_iter=max_iter, grad_tol=grad_tol, step_tol=1e-12)
    return np.concatenate([root, x]), info


def tsv_residual(tree, q, target: TaskSpaceVectors):
    """Summed squared vector mismatch in meters^2 (for reports)."""
    from .tsv import tsv_robot
    d = tsv_robot(tree, q).vectors - target.vectors
    return float(np.sum(d * d))


def retarget_tsv_sequence(tree, targets, alpha=DEFAULT_ALPHA, roots=None,
                          q_init0=None):
    """Sequential solve: frame t seeds at frame t-1's output (zero vector
    before the first frame). roots optionally overrides the root block per
    frame (rigid copy of the human root)."""
    out = []
    q_last = np.zeros(tree.dof)
    for t, target in enumerate(targets):
        if t == 0:
            q_init = q_init0 if q_init0 is not None else q_last
        else:
            q_init = out[-1]
        if roots is not None:
            q_init = q_init.copy()
            q_init[0:6] = roots[t]
        q, _ = retarget_frame(tree, target, q_last, alpha, q_init)
        out.append(q)
        q_last = q
    return out


def retarget_sequence(seq, human_tree, robot_tree, alpha=DEFAULT_ALPHA) -> RobotJointTrajectory:
    """Retarget a fitted pose sequence; timestamps are copied through."""
    if len(seq) == 0:
        raise ValueError("empty pose sequence")
    targets = [tsv_human(human_tree, hand) for _, hand, _ in seq.frames]
    roots = []
    w_prev = np.zeros(3)
    lim = robot_tree.joint_limits()
    for _, hand, _ in seq.frames:
        w = continuous_log(hand.root.rotation, w_prev)
        w_prev = w
        root = np.concatenate([hand.root.translation, w])
        roots.append(np.clip(root, lim[0:6, 0], lim[0:6, 1]))
    q_init0 = init_linear_map(robot_tree, seq.frames[0][1])
    qs = retarget_tsv_sequence(robot_tree, targets, alpha, roots=roots,
                               q_init0=q_init0)
    frames = [(t, q) for (t, _, _), q in zip(seq.frames, qs)]
    return RobotJointTrajectory(frames, robot_tree)
