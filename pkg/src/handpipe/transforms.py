"""Rigid transforms as (rotation matrix, translation) pairs."""

from dataclasses import dataclass, field

import numpy as np

from .so3 import exp_so3, is_rotation, log_so3


@dataclass
class RigidTransform:
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=float)
        self.translation = np.asarray(self.translation, dtype=float)
        if self.rotation.shape != (3, 3) or self.translation.shape != (3,):
            raise ValueError("malformed transform")

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def from_rotvec(cls, w, t):
        return cls(exp_so3(w), np.asarray(t, dtype=float))

    def compose(self, other):
        return RigidTransform(self.rotation @ other.rotation,
                              self.rotation @ other.translation + self.translation)

    def inverse(self):
        return RigidTransform(self.rotation.T, -self.rotation.T @ self.translation)

    def apply(self, points):
        points = np.asarray(points, dtype=float)
        return points @ self.rotation.T + self.translation

    def rotvec(self):
        return log_so3(self.rotation)

    def is_valid(self, tol=1e-8):
        return is_rotation(self.rotation, tol) and np.all(np.isfinite(self.translation))

    def copy(self):
        return RigidTransform(self.rotation.copy(), self.translation.copy())
