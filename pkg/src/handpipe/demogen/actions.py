"""Servo model shared between demo generation and the simulator.

The actuator tracks a position target with torque kp * (target - q); the
simulator adds viscous damping -kd * qdot on top. Actions encode targets
normalized to [-1, 1] over the actuation range (the joint limits), so
torque_to_action is the exact algebraic inverse of the servo law.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class ServoParams:
    kp: np.ndarray
    kd: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def from_tree(cls, tree):
        lim = tree.joint_limits()
        kp = float(tree.servo.get("kp", 2500.0))
        kd = float(tree.servo.get("kd", 100.0))
        n = tree.dof
        return cls(np.full(n, kp), np.full(n, kd), lim[:, 0].copy(), lim[:, 1].copy())

    @property
    def span(self):
        return self.hi - self.lo


def normalize_target(target, servo: ServoParams):
    return 2.0 * (target - servo.lo) / servo.span - 1.0


def denormalize_action(action, servo: ServoParams):
    return servo.lo + (np.asarray(action) + 1.0) * 0.5 * servo.span


def servo_torque(q, target, servo: ServoParams):
    return servo.kp * (target - q)


def torque_to_action(tau, q, servo: ServoParams):
    """Action encoding the position target q + tau/kp, clipped to [-1, 1].

    Returns (action, clip_count); clipping is the defined saturation
    behavior, not an error.
    """
    tau = np.asarray(tau, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(servo.kp <= 0):
        raise ValueError("kp must be positive")
    target = q + tau / servo.kp
    a = normalize_target(target, servo)
    clipped = int(np.sum((a < -1.0) | (a > 1.0)))
    return np.clip(a, -1.0, 1.0), clipped
