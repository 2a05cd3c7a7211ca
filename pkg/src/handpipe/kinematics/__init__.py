from .fk import (fk_full, forward_kinematics, hand_joints_3d, hand_q,
                 landmark_points, point_jacobian, points_jacobian,
                 shape_scales, site_positions)
from .model import (HandPose, JointSpec, KinematicTree, LinkSpec, ModelError,
                    SiteSpec, builtin_model, load_model)

__all__ = [
    "HandPose", "JointSpec", "KinematicTree", "LinkSpec", "ModelError",
    "SiteSpec", "builtin_model", "load_model",
    "fk_full", "forward_kinematics", "hand_joints_3d", "hand_q",
    "landmark_points", "point_jacobian", "points_jacobian",
    "shape_scales", "site_positions",
]
