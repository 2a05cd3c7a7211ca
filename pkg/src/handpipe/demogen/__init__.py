from .actions import (ServoParams, denormalize_action, normalize_target,
                      servo_torque, torque_to_action)
from .build import STATE_DIM, assemble_state, build_demonstration, filter_joint_matrix
from .filters import butterworth_gain, lowpass, so3_lowpass
from .resample import align_timesteps, resample_positions, resample_rotations
from .rnea import (coordinate_rates_to_joint, forward_dynamics,
                   inverse_dynamics, inverse_dynamics_batch,
                   joint_torque_to_coordinates, mass_matrix)
from .spline import SplineTrajectory, fit_minjerk, fit_minjerk_trajectory
from .types import Demonstration, load_demonstration, save_demonstration

__all__ = [
    "Demonstration", "STATE_DIM", "ServoParams", "SplineTrajectory",
    "align_timesteps", "assemble_state", "build_demonstration",
    "butterworth_gain", "coordinate_rates_to_joint", "denormalize_action",
    "filter_joint_matrix", "fit_minjerk", "fit_minjerk_trajectory",
    "forward_dynamics", "inverse_dynamics", "inverse_dynamics_batch",
    "joint_torque_to_coordinates",
    "load_demonstration", "lowpass", "mass_matrix", "normalize_target",
    "resample_positions", "resample_rotations", "save_demonstration",
    "servo_torque", "so3_lowpass", "torque_to_action",
]
