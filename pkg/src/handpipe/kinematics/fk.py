"""Forward kinematics, point Jacobians, and the 21-landmark hand map."""

import warnings

import numpy as np

from ..so3 import exp_so3, log_so3, right_jacobian
from .model import HandPose, KinematicTree


_ZERO3 = np.zeros(3)


def _axis_mats(joint):
    """Cached hat(axis) and hat(axis)^2 for revolute joints."""
    mats = getattr(joint, "_axis_mats", None)
    if mats is None:
        from ..so3 import hat
        K = hat(joint.axis)
        mats = (K, K @ K)
        joint._axis_mats = mats
    return mats


def _joint_motion(joint, qj):
    """(R, t) of the joint motion in the origin frame."""
    if joint.kind == "revolute":
        K, K2 = _axis_mats(joint)
        a = qj[0]
        return np.eye(3) + np.sin(a) * K + (1.0 - np.cos(a)) * K2, _ZERO3
    if joint.kind == "ball":
        return exp_so3(qj), _ZERO3
    # free: translate then rotate
    return exp_so3(qj[3:6]), np.asarray(qj[0:3])


class FkResult:
    """World transforms per link plus per-joint frames needed by Jacobians."""

    __slots__ = ("rotations", "positions", "joint_pre_rot", "joint_origin_pos",
                 "joint_child_rot")

    def __init__(self, n_links, n_joints):
        self.rotations = np.zeros((n_links, 3, 3))
        self.positions = np.zeros((n_links, 3))
        self.joint_pre_rot = np.zeros((n_joints, 3, 3))
        self.joint_origin_pos = np.zeros((n_joints, 3))
        self.joint_child_rot = np.zeros((n_joints, 3, 3))


def fk_full(tree: KinematicTree, q, origin_scale=None) -> FkResult:
    """Compose transforms root-to-leaf; origin_scale multiplies joint origin
    translations per joint (bone-length scaling)."""
    q = np.asarray(q, dtype=float)
    if q.shape != (tree.dof,):
        raise ValueError(f"expected q of length {tree.dof}, got {q.shape}")
    out = FkResult(len(tree.links), len(tree.joints))
    for link in tree.order:
        ji = tree.link_joint[link]
        joint = tree.joints[ji]
        if joint.parent_link < 0:
            Rp, pp = np.eye(3), np.zeros(3)
        else:
            Rp = out.rotations[joint.parent_link]
            pp = out.positions[joint.parent_link]
        ot = joint.origin.translation
        if origin_scale is not None:
            ot = ot * origin_scale[ji]
        R_pre = Rp @ joint.origin.rotation
        p_origin = pp + Rp @ ot
        Rj, tj = _joint_motion(joint, q[tree.q_slices[ji]])
        out.joint_pre_rot[ji] = R_pre
        out.joint_origin_pos[ji] = p_origin + R_pre @ tj
        R_child = R_pre @ Rj
        out.joint_child_rot[ji] = R_child
        out.rotations[link] = R_child
        out.positions[link] = p_origin + R_pre @ tj
    return out


def forward_kinematics(tree: KinematicTree, q, origin_scale=None):
    """World-frame rigid transforms for every link, as (rotations, positions).

    Joint-limit violations warn rather than raise.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (tree.dof,):
        raise ValueError(f"expected q of length {tree.dof}, got {q.shape}")
    lim = tree.joint_limits()
    if np.any(q < lim[:, 0] - 1e-9) or np.any(q > lim[:, 1] + 1e-9):
        warnings.warn("configuration outside joint limits", stacklevel=2)
    res = fk_full(tree, q, origin_scale)
    return res.rotations, res.positions


def site_positions(tree, fk: FkResult, names=None, site_scale=None):
    """World positions of named sites (all sites when names is None)."""
    sites = tree.sites if names is None else [tree.site(n) for n in names]
    out = np.zeros((len(sites), 3))
    for i, s in enumerate(sites):
        off = s.offset
        if site_scale is not None:
            idx = tree.site_index[s.name]
            off = off * site_scale[idx]
        out[i] = fk.positions[s.link] + fk.rotations[s.link] @ off
    return out


def _cols_cross(axes, r):
    """cross(axes[:, k], r) for all columns, without np.cross overhead."""
    a0, a1, a2 = axes[0], axes[1], axes[2]
    return np.stack([a1 * r[2] - a2 * r[1],
                     a2 * r[0] - a0 * r[2],
                     a0 * r[1] - a1 * r[0]])


def _jacobian_into(tree, fk, q, link, p_world, J):
    """Fill a (3, dof) array with d p_world / d q for a point on `link`."""
    for ji in tree.ancestors(link):
        joint = tree.joints[ji]
        sl = tree.q_slices[ji]
        r = p_world - fk.joint_origin_pos[ji]
        if joint.kind == "revolute":
            a = fk.joint_pre_rot[ji] @ joint.axis
            J[0, sl.start] = a[1] * r[2] - a[2] * r[1]
            J[1, sl.start] = a[2] * r[0] - a[0] * r[2]
            J[2, sl.start] = a[0] * r[1] - a[1] * r[0]
        elif joint.kind == "ball":
            axes = fk.joint_child_rot[ji] @ right_jacobian(q[sl])
            J[:, sl] = _cols_cross(axes, r)
        else:  # free
            J[:, sl.start:sl.start + 3] = fk.joint_pre_rot[ji]
            axes = fk.joint_child_rot[ji] @ right_jacobian(q[sl.start + 3:sl.stop])
            J[:, sl.start + 3:sl.stop] = _cols_cross(axes, r)


def point_jacobian(tree: KinematicTree, q, link, point, origin_scale=None):
    """3 x dof Jacobian of the world position of `point` (link frame).

    Columns of joints off the root-to-link path are zero.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (tree.dof,):
        raise ValueError(f"expected q of length {tree.dof}, got {q.shape}")
    if not 0 <= link < len(tree.links):
        raise ValueError("invalid link index")
    fk = fk_full(tree, q, origin_scale)
    p_world = fk.positions[link] + fk.rotations[link] @ np.asarray(point, dtype=float)
    J = np.zeros((3, tree.dof))
    _jacobian_into(tree, fk, q, link, p_world, J)
    return J


def points_jacobian(tree, q, points, origin_scale=None, fk=None):
    """Stacked Jacobians for several (link, offset) points; returns
    (positions (P,3), jacobians (P,3,dof))."""
    q = np.asarray(q, dtype=float)
    if fk is None:
        fk = fk_full(tree, q, origin_scale)
    P = len(points)
    pos = np.zeros((P, 3))
    J = np.zeros((P, 3, tree.dof))
    for i, (link, off) in enumerate(points):
        pos[i] = fk.positions[link] + fk.rotations[link] @ np.asarray(off, dtype=float)
        _jacobian_into(tree, fk, q, link, pos[i], J[i])
    return pos, J


# ---------------------------------------------------------------------------
# hand-specific helpers

def hand_q(tree, pose: HandPose):
    """Pack a HandPose into the human tree's 51-vector."""
    q = np.zeros(tree.dof)
    q[0:3] = pose.root.translation
    q[3:6] = log_so3(pose.root.rotation)
    q[6:] = pose.theta
    return q


def shape_scales(tree, beta):
    """Per-joint and per-site origin scale vectors from a bone-group beta."""
    beta = np.asarray(beta, dtype=float)
    js = np.ones(len(tree.joints))
    ss = np.ones(len(tree.sites))
    for i, j in enumerate(tree.joints):
        if j.shape_group >= 0:
            js[i] = beta[j.shape_group]
    for i, s in enumerate(tree.sites):
        if s.shape_group >= 0:
            ss[i] = beta[s.shape_group]
    return js, ss


def landmark_points(tree, site_scale=None):
    """(link, offset) pairs for the 21 hand landmarks in canonical order."""
    pts = []
    for name in tree.meta["landmark_sites"]:
        s = tree.site(name)
        off = s.offset
        if site_scale is not None:
            off = off * site_scale[tree.site_index[s.name]]
        pts.append((s.link, off))
    return pts


def hand_joints_3d(tree: KinematicTree, pose: HandPose):
    """21x3 world positions: wrist, then per finger (thumb..pinky) the
    mcp/pip/dip joints and the fingertip, proximal to tip."""
    js, ss = shape_scales(tree, pose.beta)
    q = hand_q(tree, pose)
    fk = fk_full(tree, q, origin_scale=js)
    pts = landmark_points(tree, site_scale=ss)
    out = np.zeros((21, 3))
    for i, (link, off) in enumerate(pts):
        out[i] = fk.positions[link] + fk.rotations[link] @ off
    return out
