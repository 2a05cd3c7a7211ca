"""Closed-form 6-DoF object pose from keypoint correspondences.

The matching error sum_i ||khat_i - (R k_i + T)||^2 with known correspondences
is the orthogonal Procrustes problem: centroid subtraction, SVD of the
cross-covariance, and a determinant sign correction give the global optimum.
"""

import numpy as np

from .types import ObjectKeypointSet, ObjectPose


def solve_object_pose(obs: ObjectKeypointSet):
    """Globally optimal (R, T) aligning model keypoints to predictions.

    Returns (ObjectPose, residual) where residual is the summed squared
    matching error at the optimum.
    """
    model = obs.model_points
    pred = obs.predicted_points
    k = model.shape[0]
    if k < 3:
        raise ValueError("need at least 3 keypoint correspondences")
    cm = model.mean(axis=0)
    cp = pred.mean(axis=0)
    a = model - cm
    b = pred - cp
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[1] < 1e-12 * max(1.0, sv[0]):
        raise ValueError("rank-deficient model points (collinear)")
    h = a.T @ b
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    rot = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    trans = cp - rot @ cm
    residual = float(np.sum((pred - (model @ rot.T + trans)) ** 2))
    return ObjectPose(rot, trans), residual
