"""Observation files: synthetic keypoint/depth measurements per frame, plus
the per-frame initializer channel standing in for a learned regressor."""

import numpy as np

from ..kinematics import HandPose
from ..posefit import CameraModel, HandObservation, ObjectKeypointSet
from ..so3 import exp_so3, log_so3
from ..textio import read_records, write_records
from ..transforms import RigidTransform

OBS_VERSION = 1


def _cam_dict(cam: CameraModel):
    return {"fx": cam.fx, "fy": cam.fy, "cx": cam.cx, "cy": cam.cy,
            "w": log_so3(cam.extrinsic.rotation).tolist(),
            "t3": cam.extrinsic.translation.tolist()}


def _cam_from(d):
    return CameraModel(d["fx"], d["fy"], d["cx"], d["cy"],
                       RigidTransform(exp_so3(d["w"]), np.asarray(d["t3"])))


def _pose_dict(pose: HandPose):
    return {"theta": pose.theta.tolist(), "beta": pose.beta.tolist(),
            "root_w": log_so3(pose.root.rotation).tolist(),
            "root_t": pose.root.translation.tolist()}


def _pose_from(d):
    return HandPose(np.asarray(d["theta"]), np.asarray(d["beta"]),
                    RigidTransform(exp_so3(d["root_w"]), np.asarray(d["root_t"])))


def save_observations(path, cameras, frames, init_poses):
    """frames: list of (ObjectKeypointSet, HandObservation)."""
    header = {"format": "obsfile", "version": OBS_VERSION,
              "cameras": [_cam_dict(c) for c in cameras]}
    records = []
    for (kp, hob), init in zip(frames, init_poses):
        records.append({
            "kp_model": kp.model_points.tolist(),
            "kp_pred": kp.predicted_points.tolist(),
            "j2d": [j.tolist() for j in hob.joints_2d],
            "depth": [d.tolist() for d in hob.depth_samples],
            "init": _pose_dict(init),
        })
    write_records(path, header, records)


def load_observations(path):
    """Returns (cameras, [(ObjectKeypointSet, HandObservation)], [init poses])."""
    header, records = read_records(path, expect_format="obsfile",
                                   expect_version=OBS_VERSION)
    cameras = [_cam_from(d) for d in header["cameras"]]
    frames, inits = [], []
    for rec in records:
        kp = ObjectKeypointSet(np.asarray(rec["kp_model"]),
                               np.asarray(rec["kp_pred"]))
        hob = HandObservation(list(cameras),
                              [np.asarray(j) for j in rec["j2d"]],
                              [np.asarray(d) for d in rec["depth"]])
        frames.append((kp, hob))
        inits.append(_pose_from(rec["init"]))
    return cameras, frames, inits
