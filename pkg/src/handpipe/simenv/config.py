"""Environment configuration and the object proxy table.

The table is the z = 0 plane; 1 unit = 1 meter. Objects are primitive
proxies with an effective grasp sphere used by the contact model.
"""

from dataclasses import dataclass, field

import numpy as np

TASKS = ("relocate", "pour", "place_inside")

CONTROL_DT = 0.01     # dt * frame_skip


@dataclass
class ObjectSpec:
    object_id: str
    kind: str                # cylinder | box | capsule
    dims: tuple              # cylinder: (r, h); box: (lx, ly, lz); capsule: (r, cyl_len)
    grasp_radius: float      # surface proxy sphere
    rest_height: float       # center height at rest on the table

    def scaled(self, s):
        return ObjectSpec(self.object_id, self.kind,
                          tuple(d * s for d in self.dims),
                          self.grasp_radius * s, self.rest_height * s)


OBJECTS = {
    "mug": ObjectSpec("mug", "cylinder", (0.040, 0.100), 0.047, 0.050),
    "tomato_soup": ObjectSpec("tomato_soup", "cylinder", (0.033, 0.100), 0.042, 0.050),
    "mustard_bottle": ObjectSpec("mustard_bottle", "cylinder", (0.035, 0.190), 0.048, 0.095),
    "sugar_box": ObjectSpec("sugar_box", "box", (0.045, 0.090, 0.175), 0.052, 0.0875),
    "large_clamp": ObjectSpec("large_clamp", "box", (0.120, 0.060, 0.035), 0.050, 0.0175),
    "banana": ObjectSpec("banana", "capsule", (0.015, 0.0915), 0.032, 0.015),
}

# receptacles (fixed at the table center)
CONTAINER = dict(r_inner=0.075, height=0.060, base=0.005)          # pour target
MUG_RECEPTACLE = dict(r_inner=0.036, height=0.100, base=0.008)     # place_inside target

N_PARTICLES = 32
PARTICLE_RADIUS = 0.006

# the geometric maximum insertable volume fraction of the banana/mug pair
MAX_INSIDE_FRACTION = 0.7819


@dataclass
class RewardWeights:
    reach: float = 0.1        # hand-to-object distance
    carry_hand: float = 0.5   # hand-to-target distance once lifted
    carry_obj: float = 0.5    # object-to-target distance once lifted
    lift_bonus: float = 1.0
    pour_main: float = 1.0    # multiplied by 10 on the particle fraction
    inside_main: float = 1.0  # multiplied by 10 on the inside proxy


@dataclass
class EnvConfig:
    task: str = "relocate"
    object_id: str = "mug"
    scale: float = 1.0
    friction: float = 1.0
    dt: float = 0.002
    frame_skip: int = 5
    horizon: int = 200
    gravity: tuple = (0.0, 0.0, -9.81)
    weights: RewardWeights = field(default_factory=RewardWeights)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if abs(self.dt * self.frame_skip - CONTROL_DT) > 1e-12:
            raise ValueError("dt * frame_skip must equal the 0.01 s control period")
        if self.object_id not in OBJECTS:
            raise ValueError(f"unknown object {self.object_id!r}")

    @property
    def object_spec(self):
        return OBJECTS[self.object_id].scaled(self.scale)

    @property
    def obs_dim(self):
        return 39 if self.task == "relocate" else 43


HOME_ROOT = np.array([-0.28, 0.0, 0.13, 0.0, 0.0, 0.0])

# rest configuration of the 24 finger joints: the task-space image of the
# canonical open hand on this robot model (calibration constant; episodes
# start where retargeted demonstrations start)
HOME_FINGERS = np.array([
    -0.204432, 0.007064, -0.025695, 0.810981, -0.154646, -0.250000,
    -0.024321, 0.779472, -0.250000, 0.020309, -0.017517, 0.797885,
    -0.141610, -0.250000, -0.667020, 0.305975, 0.151610, -0.300000,
    0.727318, 0.348433, 0.086787, 0.025578, -0.250000, 0.873880,
])
