"""Hand pose estimation from 2D joints and sparse depth, by damped Gauss-Newton.

The per-frame objective is E_2d + lambda * E_depth summed over cameras:
E_2d is squared pixel reprojection error of the 21 forward-kinematics
landmarks; E_depth compares each projected landmark's camera depth with the
nearest depth sample within a 10-pixel radius (landmarks with no nearby
sample contribute nothing). Depth residuals are taken in millimeters so the
default lambda gives the term sensible weight against pixel-squared errors.

Parameters are packed as [root translation (3), root rotation vector (3),
theta (45), beta (10)] = 61.
"""

import numpy as np

from ..kinematics import (HandPose, hand_q, landmark_points, points_jacobian,
                          shape_scales)
from ..kinematics.fk import fk_full
from ..optim import box_lm
from ..so3 import exp_so3, log_so3
from ..transforms import RigidTransform

DEPTH_ASSOC_RADIUS_PX = 10.0
DEPTH_UNIT = 1000.0    # residual scale: meters -> millimeters

N_PARAMS = 61


def pack_pose(pose: HandPose):
    return np.concatenate([pose.root.translation, log_so3(pose.root.rotation),
                           pose.theta, pose.beta])


def unpack_pose(p):
    return HandPose(p[6:51].copy(), p[51:61].copy(),
                    RigidTransform(exp_so3(p[3:6]), p[0:3].copy()))


def param_bounds(tree):
    lo = np.full(N_PARAMS, -np.inf)
    hi = np.full(N_PARAMS, np.inf)
    lo[0:3], hi[0:3] = -10.0, 10.0
    lo[3:6], hi[3:6] = -3.2, 3.2
    lim = tree.joint_limits()[6:]     # theta rows
    lo[6:51] = lim[:, 0]
    hi[6:51] = lim[:, 1]
    lo[51:61], hi[51:61] = 0.55, 1.9
    return lo, hi


def hand_landmarks_with_jacobian(tree, p, need_jac=True):
    """Landmark positions (21,3) and d(landmarks)/d(params) (21,3,61)."""
    theta, beta = p[6:51], p[51:61]
    q = np.concatenate([p[0:6], theta])
    js, ss = shape_scales(tree, beta)
    fk = fk_full(tree, q, origin_scale=js)
    pts = landmark_points(tree, site_scale=ss)
    if not need_jac:
        pos = np.zeros((21, 3))
        for i, (link, off) in enumerate(pts):
            pos[i] = fk.positions[link] + fk.rotations[link] @ off
        return pos, None
    pos, Jq = points_jacobian(tree, q, pts, fk=fk)
    J = np.zeros((21, 3, N_PARAMS))
    J[:, :, 0:51] = Jq
    # beta columns: positions are linear in each scaled origin translation
    for i, name in enumerate(tree.meta["landmark_sites"]):
        site = tree.site(name)
        for ji in tree.ancestors(site.link):
            joint = tree.joints[ji]
            if joint.shape_group < 0:
                continue
            parent = joint.parent_link
            Rp = fk.rotations[parent] if parent >= 0 else np.eye(3)
            J[i, :, 51 + joint.shape_group] += Rp @ joint.origin.translation
        if site.shape_group >= 0:
            J[i, :, 51 + site.shape_group] += fk.rotations[site.link] @ site.offset
    return pos, J


def _camera_residuals(cam, joints_2d, depth, pos, J, lam):
    """Residual blocks (and jacobians) for one camera."""
    rc = cam.extrinsic.rotation
    pc = pos @ rc.T + cam.extrinsic.translation
    z = pc[:, 2]
    if np.any(z <= 1e-9):
        raise FloatingPointError("landmark behind camera during fit")
    u = cam.fx * pc[:, 0] / z + cam.cx
    v = cam.fy * pc[:, 1] / z + cam.cy
    r2d = np.concatenate([u - joints_2d[:, 0], v - joints_2d[:, 1]])

    # nearest depth sample within the association radius, per landmark
    rdep = np.zeros(21)
    has = np.zeros(21, dtype=bool)
    idx = np.zeros(21, dtype=int)
    if depth.size:
        du = u[:, None] - depth[None, :, 0]
        dv = v[:, None] - depth[None, :, 1]
        d2 = du * du + dv * dv
        idx = np.argmin(d2, axis=1)
        has = d2[np.arange(21), idx] <= DEPTH_ASSOC_RADIUS_PX**2
        rdep = np.where(has, (z - depth[idx, 2]) * DEPTH_UNIT, 0.0)
    sl = np.sqrt(lam)
    res = np.concatenate([r2d, sl * rdep])
    if J is None:
        return res, None
    # chain rule through the pinhole model
    Jc = np.einsum("ab,pbn->pan", rc, J)     # (21, 3, n) in camera frame
    ju = (cam.fx * Jc[:, 0, :] - (cam.fx * pc[:, 0] / z)[:, None] * Jc[:, 2, :]) / z[:, None]
    jv = (cam.fy * Jc[:, 1, :] - (cam.fy * pc[:, 1] / z)[:, None] * Jc[:, 2, :]) / z[:, None]
    jdep = sl * DEPTH_UNIT * Jc[:, 2, :] * has[:, None]
    return res, np.vstack([ju, jv, jdep])


def fit_residuals(tree, p, obs, lam, need_jac=True, extra=None):
    """Stacked residual vector (and jacobian) over all cameras.

    extra: optional list of (residual_fn) appending blocks; used by the
    sequence post-processor.
    """
    pos, J = hand_landmarks_with_jacobian(tree, p, need_jac)
    blocks, jblocks = [], []
    for cam, j2d, dep in zip(obs.cameras, obs.joints_2d, obs.depth_samples):
        r, Jr = _camera_residuals(cam, j2d, dep, pos, J, lam)
        blocks.append(r)
        if need_jac:
            jblocks.append(Jr)
    if extra is not None:
        for fn in extra:
            r, Jr = fn(pos, J)
            blocks.append(r)
            if need_jac:
                jblocks.append(Jr)
    r = np.concatenate(blocks)
    if not np.all(np.isfinite(r)):
        raise FloatingPointError("non-finite objective")
    if not need_jac:
        return (r,)
    return r, np.vstack(jblocks)


def fit_objective(tree, pose, obs, lam=0.001):
    """E_2d + lambda * E_depth at a pose (for tests and reports)."""
    r = fit_residuals(tree, pack_pose(pose), obs, lam, need_jac=False)[0]
    return float(r @ r)


def solve_hand_pose(tree, init: HandPose, obs, lam=0.001, max_iter=200,
                    grad_tol=1e-6, trace=None):
    """Locally minimize the reprojection-plus-depth objective from init."""
    lo, hi = param_bounds(tree)
    x, info = box_lm(lambda p, nj: fit_residuals(tree, p, obs, lam, nj),
                     pack_pose(init), lo, hi,
                     max_iter=max_iter, grad_tol=grad_tol, step_tol=1e-9,
                     trace=trace)
    return unpack_pose(x), info


def _total_variation(joint_seq):
    d = np.diff(joint_seq, axis=0)
    return float(np.sum(d * d))


def postprocess_sequence(tree, poses, obs_seq, mu=0.01, lam=0.001, sweeps=4,
                         iters_per_frame=12):
    """Jointly refine a fitted sequence for temporal smoothness and shape
    consistency.

    Gauss-Seidel sweeps re-solve each frame against its neighbors' current
    landmarks, with a quadratic pull of every beta toward the running mean
    (recomputed each sweep). If the refinement failed to reduce the summed
    squared frame-to-frame landmark variation, the input is returned.
    """
    n = len(poses)
    if n < 2:
        raise ValueError("post-processing needs at least 2 frames")
    if len(obs_seq) != n:
        raise ValueError("observation sequence length mismatch")
    lo, hi = param_bounds(tree)
    params = [pack_pose(p) for p in poses]
    joints = [hand_landmarks_with_jacobian(tree, p, need_jac=False)[0]
              for p in params]
    tv_in = _total_variation(np.stack(joints))
    smu = np.sqrt(mu)

    def temporal_block(nb):
        def block(pos, J):
            r = smu * (pos - nb).ravel()
            Jr = None if J is None else smu * J.reshape(63, N_PARAMS)
            return r, Jr
        return block

    for _ in range(sweeps):
        beta_bar = np.mean([p[51:61] for p in params], axis=0)
        for t in range(n):
            neighbors = []
            if t > 0:
                neighbors.append(joints[t - 1])
            if t < n - 1:
                neighbors.append(joints[t + 1])

            def fun(p, nj, _t=t, _nb=neighbors, _bb=beta_bar):
                def beta_block(pos, J, _p=p):
                    r = smu * (_p[51:61] - _bb)
                    if J is None:
                        return r, None
                    Jr = np.zeros((10, N_PARAMS))
                    Jr[:, 51:61] = smu * np.eye(10)
                    return r, Jr
                hooks = [temporal_block(nb) for nb in _nb] + [beta_block]
                return fit_residuals(tree, p, obs_seq[_t], lam, nj, extra=hooks)

            x, _ = box_lm(fun, params[t], lo, hi, max_iter=iters_per_frame,
                          grad_tol=1e-8, step_tol=1e-12)
            params[t] = x
            joints[t] = hand_landmarks_with_jacobian(tree, x, need_jac=False)[0]

    tv_out = _total_variation(np.stack(joints))
    if tv_out > tv_in:
        return [p.copy() for p in poses]
    return [unpack_pose(p) for p in params]
