"""Retargeting data carriers and the robot-trajectory container."""

from dataclasses import dataclass

import numpy as np

from ..textio import read_records, write_records

RJT_VERSION = 1

FINGER_ORDER = ("thumb", "index", "middle", "ring", "pinky")


@dataclass
class TaskSpaceVectors:
    """10x3 wrist-frame vectors: per finger (thumb..pinky), wrist-to-proximal
    then proximal-to-tip."""

    vectors: np.ndarray

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        if self.vectors.shape != (10, 3):
            raise ValueError("task space vectors must be (10, 3)")
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("task space vectors must be finite")


@dataclass
class RobotJointTrajectory:
    frames: list            # of (timestamp, q (30,))
    tree: object            # robot KinematicTree

    def __post_init__(self):
        self.frames = [(float(t), np.asarray(q, dtype=float)) for t, q in self.frames]
        ts = np.array([t for t, _ in self.frames])
        if len(ts) > 1 and np.any(np.diff(ts) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        lim = self.tree.joint_limits()
        for _, q in self.frames:
            if q.shape != (self.tree.dof,):
                raise ValueError("joint vector length mismatch")
            if np.any(q < lim[:, 0] - 1e-8) or np.any(q > lim[:, 1] + 1e-8):
                raise ValueError("joint vector outside limits")

    def __len__(self):
        return len(self.frames)

    def timestamps(self):
        return np.array([t for t, _ in self.frames])

    def joint_matrix(self):
        return np.stack([q for _, q in self.frames])


def save_robot_trajectory(path, traj: RobotJointTrajectory):
    header = {"format": "poseq", "version": RJT_VERSION, "kind": "robot_joint",
              "rate_hz": _infer_rate(traj), "models": {"robot": traj.tree.name}}
    write_records(path, header,
                  [{"t": t, "q": q.tolist()} for t, q in traj.frames])


def load_robot_trajectory(path, tree) -> RobotJointTrajectory:
    header, records = read_records(path, expect_format="poseq",
                                   expect_version=RJT_VERSION)
    if header.get("kind") != "robot_joint":
        raise ValueError(f"{path}: not a robot_joint trajectory")
    if header.get("models", {}).get("robot") != tree.name:
        raise ValueError(f"{path}: model id mismatch")
    return RobotJointTrajectory([(r["t"], r["q"]) for r in records], tree)


def _infer_rate(traj):
    ts = traj.timestamps()
    if len(ts) < 2:
        return 0.0
    return round(1.0 / float(np.mean(np.diff(ts))), 9)
