"""Versioned .poseq container for (hand, object) pose sequences.

Header: {"format": "poseq", "version": 1, "kind": "hand_object",
"rate_hz": ..., "models": {...}}. One frame record per line with rotations
stored as rotation vectors.
"""

import numpy as np

from ..kinematics import HandPose
from ..so3 import exp_so3, log_so3
from ..textio import read_records, write_records
from ..transforms import RigidTransform
from .types import ObjectPose, PoseSequence

POSEQ_VERSION = 1


def save_pose_sequence(path, seq: PoseSequence, models=None):
    header = {"format": "poseq", "version": POSEQ_VERSION, "kind": "hand_object",
              "rate_hz": seq.rate_hz, "models": models or {"hand": "human_hand"}}
    records = []
    for t, hand, obj in seq.frames:
        records.append({
            "t": float(t),
            "hand": {"theta": hand.theta.tolist(), "beta": hand.beta.tolist(),
                     "root_w": log_so3(hand.root.rotation).tolist(),
                     "root_t": hand.root.translation.tolist()},
            "object": {"w": log_so3(obj.rotation).tolist(),
                       "t3": obj.translation.tolist()},
        })
    write_records(path, header, records)


def load_pose_sequence(path) -> PoseSequence:
    header, records = read_records(path, expect_format="poseq",
                                   expect_version=POSEQ_VERSION)
    if header.get("kind") != "hand_object":
        raise ValueError(f"{path}: not a hand_object sequence")
    frames = []
    for rec in records:
        h = rec["hand"]
        hand = HandPose(np.asarray(h["theta"]), np.asarray(h["beta"]),
                        RigidTransform(exp_so3(h["root_w"]), np.asarray(h["root_t"])))
        o = rec["object"]
        obj = ObjectPose(exp_so3(o["w"]), np.asarray(o["t3"]))
        frames.append((rec["t"], hand, obj))
    return PoseSequence(frames, header["rate_hz"])
