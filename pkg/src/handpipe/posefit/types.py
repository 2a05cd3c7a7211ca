"""Pose-estimation data carriers."""

from dataclasses import dataclass, field

import numpy as np

from ..kinematics import HandPose
from ..so3 import is_rotation
from ..transforms import RigidTransform


@dataclass
class ObjectPose:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=float)
        self.translation = np.asarray(self.translation, dtype=float)
        if not is_rotation(self.rotation, tol=1e-8):
            raise ValueError("rotation is not in SO(3)")
        if self.translation.shape != (3,):
            raise ValueError("translation must be a 3-vector")

    def transform(self):
        return RigidTransform(self.rotation, self.translation)

    def copy(self):
        return ObjectPose(self.rotation.copy(), self.translation.copy())


@dataclass
class ObjectKeypointSet:
    model_points: np.ndarray       # (K, 3) in the object frame
    predicted_points: np.ndarray   # (K, 3) in the world frame

    def __post_init__(self):
        self.model_points = np.asarray(self.model_points, dtype=float)
        self.predicted_points = np.asarray(self.predicted_points, dtype=float)
        if self.model_points.ndim != 2 or self.model_points.shape[1] != 3:
            raise ValueError("model_points must be (K, 3)")
        if self.model_points.shape != self.predicted_points.shape:
            raise ValueError("keypoint sets must have matching shapes")


@dataclass
class CameraModel:
    fx: float
    fy: float
    cx: float
    cy: float
    extrinsic: RigidTransform = field(default_factory=RigidTransform.identity)

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")

    def to_camera(self, points):
        return np.asarray(points, dtype=float) @ self.extrinsic.rotation.T \
            + self.extrinsic.translation

    def project(self, points):
        """Pixel coordinates and depths; raises if a point is behind the camera."""
        pc = self.to_camera(points)
        z = pc[..., 2]
        if np.any(z <= 1e-9):
            raise ValueError("point behind camera")
        pix = np.stack([self.fx * pc[..., 0] / z + self.cx,
                        self.fy * pc[..., 1] / z + self.cy], axis=-1)
        return pix, z


@dataclass
class HandObservation:
    """Per-camera 2D joints and sparse depth samples of the hand region."""

    cameras: list                  # of CameraModel
    joints_2d: list                # per camera (21, 2) pixel arrays
    depth_samples: list            # per camera (M, 3) rows of [u, v, depth_m]

    def __post_init__(self):
        if len(self.cameras) < 1:
            raise ValueError("at least one camera required")
        if not (len(self.cameras) == len(self.joints_2d) == len(self.depth_samples)):
            raise ValueError("per-camera lists must align")
        self.joints_2d = [np.asarray(j, dtype=float) for j in self.joints_2d]
        self.depth_samples = [np.asarray(d, dtype=float).reshape(-1, 3)
                              for d in self.depth_samples]
        for d in self.depth_samples:
            if d.size and (np.any(~np.isfinite(d)) or np.any(d[:, 2] <= 0)):
                raise ValueError("depth samples must be finite and positive")


@dataclass
class PoseSequence:
    """Fitted or ground-truth (hand, object) poses over time."""

    frames: list                   # of (timestamp, HandPose, ObjectPose)
    rate_hz: float

    def __post_init__(self):
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        ts = np.array([f[0] for f in self.frames], dtype=float)
        if len(ts) > 1 and np.any(np.diff(ts) <= 0):
            raise ValueError("timestamps must be strictly increasing")

    def __len__(self):
        return len(self.frames)

    def timestamps(self):
        return np.array([f[0] for f in self.frames], dtype=float)

    def hand_poses(self):
        return [f[1] for f in self.frames]

    def object_poses(self):
        return [f[2] for f in self.frames]
