"""Task-space vectors of the human skeleton and the robot hand."""

import numpy as np

from ..kinematics import HandPose, hand_joints_3d
from ..kinematics.fk import fk_full, site_positions
from .types import TaskSpaceVectors

# landmark rows: wrist 0, then per finger [mcp, pip, dip, tip]
_PIP = [2 + 4 * f for f in range(5)]
_TIP = [4 + 4 * f for f in range(5)]


def tsv_human(tree, pose: HandPose) -> TaskSpaceVectors:
    """Wrist-frame vectors from the 21-landmark map; invariant to the root
    transform by construction."""
    joints = hand_joints_3d(tree, pose)
    rt = pose.root.rotation.T
    wrist = joints[0]
    vecs = np.zeros((10, 3))
    for f in range(5):
        pip = joints[_PIP[f]]
        tip = joints[_TIP[f]]
        vecs[2 * f] = rt @ (pip - wrist)
        vecs[2 * f + 1] = rt @ (tip - pip)
    return TaskSpaceVectors(vecs)


def tsv_robot(tree, q) -> TaskSpaceVectors:
    """Same construction on the robot model's named proximal/tip sites."""
    fk = fk_full(tree, np.asarray(q, dtype=float))
    names = ([tree.meta["wrist_site"]] + list(tree.meta["tsv_proximal_sites"])
             + list(tree.meta["tsv_tip_sites"]))
    pos = site_positions(tree, fk, names)
    wrist = pos[0]
    prox = pos[1:6]
    tip = pos[6:11]
    rt = fk.rotations[tree.root].T
    vecs = np.zeros((10, 3))
    for f in range(5):
        vecs[2 * f] = rt @ (prox[f] - wrist)
        vecs[2 * f + 1] = rt @ (tip[f] - prox[f])
    return TaskSpaceVectors(vecs)
