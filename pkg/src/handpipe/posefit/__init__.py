from .handfit import (fit_objective, fit_residuals,
                      hand_landmarks_with_jacobian, pack_pose, param_bounds,
                      postprocess_sequence, solve_hand_pose, unpack_pose)
from .io import load_pose_sequence, save_pose_sequence
from .procrustes import solve_object_pose
from .synth import default_cameras, synthesize_observations
from .types import (CameraModel, HandObservation, ObjectKeypointSet,
                    ObjectPose, PoseSequence)

__all__ = [
    "CameraModel", "HandObservation", "ObjectKeypointSet", "ObjectPose",
    "PoseSequence", "default_cameras", "fit_objective", "fit_residuals",
    "hand_landmarks_with_jacobian", "load_pose_sequence", "pack_pose",
    "param_bounds", "postprocess_sequence", "save_pose_sequence",
    "solve_hand_pose", "solve_object_pose", "synthesize_observations",
    "unpack_pose",
]
