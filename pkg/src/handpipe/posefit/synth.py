"""Synthetic observation generator standing in for the camera/detector stack.

Projects ground-truth hand landmarks and object keypoints through the given
cameras, adds Gaussian noise, and draws sparse depth samples from the true
landmark depths. Deterministic under a given seed.
"""

import numpy as np

from ..kinematics import hand_joints_3d
from .types import HandObservation, ObjectKeypointSet, PoseSequence

SAMPLES_PER_JOINT = 2
PIXEL_JITTER = 3.0


def default_cameras(n=2):
    """Front and side views of the tabletop workspace."""
    from ..so3 import exp_so3
    from ..transforms import RigidTransform
    from .types import CameraModel

    def look_at(eye, target, up=(0, 0, 1.0)):
        eye = np.asarray(eye, dtype=float)
        fwd = np.asarray(target, dtype=float) - eye
        fwd /= np.linalg.norm(fwd)
        right = np.cross(fwd, up)
        right /= np.linalg.norm(right)
        down = np.cross(fwd, right)
        # camera axes: x right, y down, z forward
        R_wc = np.stack([right, down, fwd], axis=0)
        return RigidTransform(R_wc, -R_wc @ eye)

    cams = [CameraModel(600.0, 600.0, 320.0, 240.0,
                        look_at((0.0, -0.9, 0.55), (0.0, 0.0, 0.1)))]
    if n >= 2:
        cams.append(CameraModel(600.0, 600.0, 320.0, 240.0,
                                look_at((0.9, 0.05, 0.55), (0.0, 0.0, 0.1))))
    return cams[:n]


def synthesize_observations(ground_truth: PoseSequence, cameras, noise,
                            model_points, human_tree, seed=0):
    """Per-frame (ObjectKeypointSet, HandObservation) lists.

    noise: dict with px_sigma, depth_sigma, kp_sigma (all >= 0, meters or px).
    model_points: (K, 3) object keypoints in the object frame.
    """
    if not cameras:
        raise ValueError("cameras must be non-empty")
    px_sigma = float(noise.get("px_sigma", 0.0))
    depth_sigma = float(noise.get("depth_sigma", 0.0))
    kp_sigma = float(noise.get("kp_sigma", 0.0))
    if min(px_sigma, depth_sigma, kp_sigma) < 0:
        raise ValueError("noise sigmas must be non-negative")
    rng = np.random.default_rng(seed)
    model_points = np.asarray(model_points, dtype=float)

    out = []
    for _, hand, obj in ground_truth.frames:
        pred = model_points @ obj.rotation.T + obj.translation
        pred = pred + rng.normal(0.0, 1.0, size=pred.shape) * kp_sigma
        kp = ObjectKeypointSet(model_points.copy(), pred)

        joints = hand_joints_3d(human_tree, hand)
        j2d, depth = [], []
        for cam in cameras:
            pix, z = cam.project(joints)
            j2d.append(pix + rng.normal(0.0, 1.0, size=pix.shape) * px_sigma)
            rows = []
            for i in range(joints.shape[0]):
                # first sample sits on the exact projection so a perfect fit
                # sees a zero depth residual; extras scatter over the region
                d0 = z[i] + rng.normal(0.0, 1.0) * depth_sigma
                rows.append([pix[i, 0], pix[i, 1], max(d0, 1e-4)])
                for _ in range(SAMPLES_PER_JOINT - 1):
                    uv = pix[i] + rng.uniform(-PIXEL_JITTER, PIXEL_JITTER, size=2)
                    d = z[i] + rng.normal(0.0, 1.0) * depth_sigma
                    rows.append([uv[0], uv[1], max(d, 1e-4)])
            depth.append(np.asarray(rows))
        out.append((kp, HandObservation(list(cameras), j2d, depth)))
    return out
