"""Rotation utilities on SO(3) and its axis-angle (so(3)) parameterization."""

import numpy as np

_EPS = 1e-8


def hat(w):
    """Skew-symmetric matrix such that hat(w) @ v == cross(w, v)."""
    wx, wy, wz = w
    return np.array([[0.0, -wz, wy],
                     [wz, 0.0, -wx],
                     [-wy, wx, 0.0]])


def exp_so3(w):
    """Rodrigues formula; series expansion below _EPS keeps orthonormality."""
    w = np.asarray(w, dtype=float)
    angle = np.linalg.norm(w)
    W = hat(w)
    if angle < _EPS:
        R = np.eye(3) + W + 0.5 * (W @ W)
        # re-orthonormalize the first-order result
        u, _, vt = np.linalg.svd(R)
        return u @ vt
    a = np.sin(angle) / angle
    b = (1.0 - np.cos(angle)) / angle**2
    return np.eye(3) + a * W + b * (W @ W)


def log_so3(R):
    """Axis-angle vector of a rotation matrix, angle in [0, pi]."""
    R = np.asarray(R, dtype=float)
    cos = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    angle = np.arccos(cos)
    skew = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    if angle < _EPS:
        return 0.5 * skew
    if np.pi - angle < 1e-6:
        # skew part degenerates near pi; use the symmetric part a a^T
        S = (R + np.eye(3)) / 2.0
        axis = np.sqrt(np.maximum(np.diag(S), 0.0))
        # fix signs from the largest component
        k = int(np.argmax(axis))
        signs = np.sign(S[k])
        signs[signs == 0.0] = 1.0
        axis = axis * signs / signs[k]
        axis /= np.linalg.norm(axis)
        # orient so the (tiny) skew part agrees
        if np.dot(axis, skew) < 0.0:
            axis = -axis
        return axis * angle
    return skew * (angle / (2.0 * np.sin(angle)))


def right_jacobian(w):
    """J_r with d/dt exp(hat(w)) = exp(hat(w)) @ hat(J_r(w) dw/dt)."""
    w = np.asarray(w, dtype=float)
    angle = np.linalg.norm(w)
    W = hat(w)
    if angle < _EPS:
        return np.eye(3) - 0.5 * W + (W @ W) / 6.0
    b = (1.0 - np.cos(angle)) / angle**2
    c = (angle - np.sin(angle)) / angle**3
    return np.eye(3) - b * W + c * (W @ W)


def continuous_log(R, w_prev):
    """log of R on the branch closest to w_prev (2*pi*k shifts along the axis)."""
    w = log_so3(R)
    angle = np.linalg.norm(w)
    if angle < _EPS:
        # any axis works; stay near the previous branch if it was wound up
        n_prev = np.linalg.norm(w_prev)
        if n_prev > np.pi:
            k = np.round(n_prev / (2.0 * np.pi))
            return w_prev / n_prev * (2.0 * np.pi * k)
        return w
    axis = w / angle
    best = w
    best_d = np.linalg.norm(w - w_prev)
    for k in (-2, -1, 1, 2):
        cand = axis * (angle + 2.0 * np.pi * k)
        d = np.linalg.norm(cand - w_prev)
        if d < best_d:
            best, best_d = cand, d
    return best


def quat_from_matrix(R):
    """Unit quaternion [w, x, y, z] (Shepperd's method)."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    if tr > 0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (R[2, 1] - R[1, 2]) / s,
                      (R[0, 2] - R[2, 0]) / s,
                      (R[1, 0] - R[0, 1]) / s])
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2.0
        q = np.array([(R[2, 1] - R[1, 2]) / s, 0.25 * s,
                      (R[0, 1] + R[1, 0]) / s,
                      (R[0, 2] + R[2, 0]) / s])
    elif R[1, 1] > R[2, 2]:
        s = np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2.0
        q = np.array([(R[0, 2] - R[2, 0]) / s,
                      (R[0, 1] + R[1, 0]) / s, 0.25 * s,
                      (R[1, 2] + R[2, 1]) / s])
    else:
        s = np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2.0
        q = np.array([(R[1, 0] - R[0, 1]) / s,
                      (R[0, 2] + R[2, 0]) / s,
                      (R[1, 2] + R[2, 1]) / s, 0.25 * s])
    return q / np.linalg.norm(q)


def is_rotation(R, tol=1e-8):
    R = np.asarray(R)
    return (R.shape == (3, 3)
            and np.allclose(R.T @ R, np.eye(3), atol=tol)
            and np.linalg.det(R) > 0)


def random_rotation(rng, max_angle=np.pi):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return exp_so3(axis * rng.uniform(0.0, max_angle))
