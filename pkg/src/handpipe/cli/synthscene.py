"""Scripted ground-truth scenes: reach, grasp, transport (and pour / place
variants) as smooth human-hand pose sequences at 25 Hz, with the object
rigidly following the hand from the grasp moment.

Scene randomization reuses the environment's own reset draw, so a scene
built from seed s matches the episode an environment produces from the same
seed, which is what makes open-loop demo replay line up.
"""

import numpy as np

from ..kinematics import HandPose, builtin_model, hand_joints_3d
from ..posefit import ObjectPose, PoseSequence
from ..simenv import EnvConfig, make_env
from ..simenv.config import HOME_ROOT
from ..transforms import RigidTransform

RATE = 25.0

# finger-major theta layout: per finger [twist, flex, abd] x [mcp, pip, dip]
_OPEN_FLEX = 0.15
_THUMB = slice(0, 9)


def _theta_with_flexion(flex, thumb_oppose=0.0):
    """Uniform curl across the fingers plus a thumb opposition component."""
    theta = np.zeros(45)
    for f in range(5):
        for j in range(3):
            scale = (1.0, 0.9, 0.7)[j]
            theta[9 * f + 3 * j + 1] = flex * scale
    # thumb: twist the base toward the palm and flex a little less
    theta[0] = thumb_oppose
    theta[1] = 0.7 * flex
    theta[4] = 0.6 * flex
    theta[7] = 0.5 * flex
    return theta


def grasp_theta(radius):
    """Curl that cages a sphere of the given radius between thumb and
    fingers (wider objects get a shallower curl)."""
    flex = float(np.clip(1.25 - 6.0 * radius, 0.55, 1.1))
    return _theta_with_flexion(flex, thumb_oppose=0.45)


def open_theta():
    return _theta_with_flexion(_OPEN_FLEX, thumb_oppose=0.2)


def grasp_center_offset(tree, theta, beta=None):
    """Palm-frame centroid of the opposing tips at the grasp configuration."""
    pose = HandPose(theta, beta if beta is not None else np.ones(10),
                    RigidTransform.identity())
    joints = hand_joints_3d(tree, pose)
    thumb_tip = joints[4]
    finger_tips = joints[[8, 12]]        # index, middle tips
    return (thumb_tip + finger_tips.mean(axis=0)) / 2.0


def minjerk_blend(s):
    s = np.clip(s, 0.0, 1.0)
    return 10 * s**3 - 15 * s**4 + 6 * s**5


def _piecewise(t, knots, values):
    """Min-jerk blend between waypoints; values is (K, d)."""
    for k in range(len(knots) - 1):
        if t <= knots[k + 1] or k == len(knots) - 2:
            if t <= knots[k]:
                return values[k]
            s = (t - knots[k]) / (knots[k + 1] - knots[k])
            w = minjerk_blend(s)
            return (1 - w) * values[k] + w * values[k + 1]
    return values[-1]


def scene_params(cfg: EnvConfig, seed):
    """Object start / target / container draw, identical to the env reset."""
    env = make_env(cfg, batch=1)
    env.reset([seed])
    return dict(obj_pos=env.obj_pos[0].copy(), target=env.target[0].copy(),
                container=env.container_pos[0].copy(),
                grasp_radius=env.obj.grasp_radius,
                rest_height=env.obj.rest_height)


def script_scene(cfg: EnvConfig, seed, duration=10.0, rate=RATE) -> PoseSequence:
    """Ground-truth (hand, object) sequence for one scene."""
    human = builtin_model("human_hand")
    params = scene_params(cfg, seed)
    c = params["obj_pos"]
    radius = params["grasp_radius"]
    th_open = open_theta()
    th_grasp = grasp_theta(radius)
    o_g = grasp_center_offset(human, th_grasp)

    root_home = HOME_ROOT[0:3].copy()
    R_home = np.eye(3)

    grasp_pos = c - R_home @ o_g
    pre_pos = grasp_pos + np.array([0.0, 0.0, 0.10])

    if cfg.task == "relocate":
        g = params["target"]
        carry_pos = g - R_home @ o_g
        knots = np.array([0.0, 0.28, 0.42, 0.58, 0.86, 1.0]) * duration
        pos_way = np.stack([root_home, pre_pos, grasp_pos, grasp_pos,
                            carry_pos, carry_pos])
        rot_way = np.zeros((6, 3))
        flex_way = np.stack([th_open, th_open, th_open, th_grasp, th_grasp,
                             th_grasp])
        t_attach = 0.53 * duration
        release_at = None
    elif cfg.task == "pour":
        pour_pos = params["container"] * np.array([1.0, 1.0, 0.0]) \
            + np.array([0.0, -0.02, 0.30])
        carry_pos = pour_pos - R_home @ o_g
        knots = np.array([0.0, 0.22, 0.34, 0.46, 0.62, 0.85, 1.0]) * duration
        pos_way = np.stack([root_home, pre_pos, grasp_pos, grasp_pos,
                            carry_pos, carry_pos, carry_pos])
        rot_way = np.zeros((7, 3))
        rot_way[5] = [1.7, 0.0, 0.0]      # tilt past the pour angle
        rot_way[6] = [1.7, 0.0, 0.0]
        flex_way = np.stack([th_open, th_open, th_open, th_grasp, th_grasp,
                             th_grasp, th_grasp])
        t_attach = 0.42 * duration
        release_at = None
    else:  # place_inside
        mug = params["container"] * np.array([1.0, 1.0, 0.0])
        # rotate the palm so the grasped banana hangs tip-down, then hover
        # over the mug and let go
        R_tilt = np.array([0.0, 1.35, 0.0])
        drop_pos = mug + np.array([-0.02, 0.0, 0.30])
        knots = np.array([0.0, 0.22, 0.34, 0.46, 0.68, 0.84, 1.0]) * duration
        pos_way = np.stack([root_home, pre_pos, grasp_pos, grasp_pos,
                            drop_pos, drop_pos, drop_pos])
        rot_way = np.zeros((7, 3))
        rot_way[4] = R_tilt
        rot_way[5] = R_tilt
        rot_way[6] = R_tilt
        flex_way = np.stack([th_open, th_open, th_open, th_grasp, th_grasp,
                             th_grasp, open_theta()])
        t_attach = 0.42 * duration
        release_at = 0.90 * duration

    n = int(round(duration * rate))
    frames = []
    rel = None
    obj_R = np.eye(3)
    obj_p = c.copy()
    released_pose = None
    for i in range(n):
        t = i / rate
        root_t = _piecewise(t, knots, pos_way)
        root_w = _piecewise(t, knots, rot_way)
        theta = _piecewise(t, knots, flex_way)
        root = RigidTransform.from_rotvec(root_w, root_t)
        hand = HandPose(theta.copy(), np.ones(10), root)
        if release_at is not None and t >= release_at and rel is not None:
            if released_pose is None:
                from ..simenv import MUG_RECEPTACLE
                drop = obj_p.copy()
                # settle onto the mug base, keeping orientation
                axis_z = abs(obj_R[2, 0])
                spec = cfg.object_spec
                extent = axis_z * spec.dims[1] / 2 + spec.dims[0]
                drop[2] = MUG_RECEPTACLE["base"] + extent
                released_pose = (obj_R.copy(), drop)
            obj_R, obj_p = released_pose[0], released_pose[1]
        elif t >= t_attach:
            if rel is None:
                palm = RigidTransform(root.rotation, root.translation)
                rel = palm.inverse().compose(
                    RigidTransform(obj_R, obj_p))
            world = root.compose(rel)
            obj_R = world.rotation
            obj_p = world.translation
        frames.append((t, hand, ObjectPose(obj_R.copy(), obj_p.copy())))
    return PoseSequence(frames, rate)
