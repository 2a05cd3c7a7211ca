from .config import env_config, load_config
from .main import main
from .stages import (object_keypoints, stage_demogen, stage_eval,
                     stage_fitpose, stage_retarget, stage_synth, stage_train)
from .synthscene import grasp_theta, open_theta, scene_params, script_scene

__all__ = [
    "env_config", "grasp_theta", "load_config", "main", "object_keypoints",
    "open_theta", "scene_params", "script_scene", "stage_demogen",
    "stage_eval", "stage_fitpose", "stage_retarget", "stage_synth",
    "stage_train",
]
