from .solve import (DEFAULT_ALPHA, init_linear_map, retarget_frame,
                    retarget_sequence, retarget_tsv_sequence, tsv_residual)
from .tsv import tsv_human, tsv_robot
from .types import (FINGER_ORDER, RobotJointTrajectory, TaskSpaceVectors,
                    load_robot_trajectory, save_robot_trajectory)

__all__ = [
    "DEFAULT_ALPHA", "FINGER_ORDER", "RobotJointTrajectory",
    "TaskSpaceVectors", "init_linear_map", "load_robot_trajectory",
    "retarget_frame", "retarget_sequence", "retarget_tsv_sequence",
    "save_robot_trajectory", "tsv_human", "tsv_residual", "tsv_robot",
]
