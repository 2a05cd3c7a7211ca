"""Smoothing-spline time parameterization with a jerk proxy penalty.

Samples are first smoothed per DoF by ridge regression against the squared
third finite difference (the discrete jerk proxy), then interpolated with a
clamped cubic spline (zero boundary velocities). Velocity and acceleration
come from the spline's analytic derivatives.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import spsolve

JERK_EPS = 1e-4


@dataclass
class SplineTrajectory:
    knots: np.ndarray
    values: np.ndarray          # smoothed samples, (N, d)
    spline: CubicSpline

    def position(self, t):
        return self.spline(t)

    def velocity(self, t):
        return self.spline(t, 1)

    def acceleration(self, t):
        return self.spline(t, 2)

    @property
    def t0(self):
        return float(self.knots[0])

    @property
    def t1(self):
        return float(self.knots[-1])


def smooth_samples(values, eps=JERK_EPS):
    """Solve (I + eps D3^T D3) y = x per column; D3 is the third difference."""
    x = np.asarray(values, dtype=float)
    n = x.shape[0]
    if n < 4:
        raise ValueError("need at least 4 samples")
    data = np.array([[-1.0, 3.0, -3.0, 1.0]]).repeat(n - 3, axis=0)
    offsets = np.arange(4)
    d3 = sparse.diags_array([data[:, k] for k in range(4)], offsets=offsets,
                            shape=(n - 3, n), format="csc")
    a = sparse.eye_array(n, format="csc") + eps * (d3.T @ d3)
    return spsolve(a, x)


def fit_minjerk(timestamps, values, eps=JERK_EPS) -> SplineTrajectory:
    """Per-DoF smoothing spline with clamped zero boundary velocities."""
    ts = np.asarray(timestamps, dtype=float)
    x = np.asarray(values, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if len(ts) < 4:
        raise ValueError("need at least 4 frames")
    y = np.asarray(smooth_samples(x, eps))
    if y.ndim == 1:
        y = y[:, None]
    cs = CubicSpline(ts, y, axis=0, bc_type=((1, np.zeros(x.shape[1])),
                                             (1, np.zeros(x.shape[1]))))
    return SplineTrajectory(ts, y, cs)


def fit_minjerk_trajectory(traj, eps=JERK_EPS) -> SplineTrajectory:
    """Convenience wrapper over a RobotJointTrajectory."""
    return fit_minjerk(traj.timestamps(), traj.joint_matrix(), eps)
