"""Articulated kinematic-tree model: types, validation, and the document loader.

Model documents are YAML with ``links``, ``joints``, ``sites`` and ``meta``
sections. Joint kinds and their generalized-coordinate layout:

* ``revolute``: 1 DoF, rotation about ``axis`` in the joint origin frame.
* ``ball``: 3 DoF, axis-angle rotation vector in the joint origin frame.
* ``free``: 6 DoF ordered (tx, ty, tz, rx, ry, rz); translation applied in the
  origin frame, then an axis-angle rotation.

A joint's ``parent`` of ``world`` marks its child link as the tree root.
``shape_group`` on a joint or site selects the bone-length scale entry that
multiplies its origin translation / offset.
"""

import io
from dataclasses import dataclass, field

import numpy as np
import yaml

from ..so3 import exp_so3, is_rotation
from ..transforms import RigidTransform

JOINT_DOF = {"revolute": 1, "ball": 3, "free": 6}


class ModelError(ValueError):
    """Raised for malformed or inconsistent model documents."""


@dataclass
class JointSpec:
    name: str
    kind: str
    parent_link: int
    child_link: int
    origin: RigidTransform
    limits: np.ndarray           # (dof, 2)
    axis: np.ndarray | None = None
    shape_group: int = -1

    @property
    def dof(self):
        return JOINT_DOF[self.kind]


@dataclass
class LinkSpec:
    name: str
    mass: float
    com: np.ndarray
    inertia: np.ndarray          # 3x3 about com


@dataclass
class SiteSpec:
    name: str
    link: int
    offset: np.ndarray
    shape_group: int = -1


@dataclass
class KinematicTree:
    name: str
    links: list
    joints: list
    sites: list
    root: int
    dof: int
    meta: dict = field(default_factory=dict)
    servo: dict = field(default_factory=dict)
    # derived, filled by _finalize
    q_slices: list = field(default_factory=list)
    link_joint: list = field(default_factory=list)   # parent joint index per link (-1 for root)
    order: list = field(default_factory=list)        # links in topological order
    site_index: dict = field(default_factory=dict)

    def joint_index(self, name):
        for i, j in enumerate(self.joints):
            if j.name == name:
                return i
        raise KeyError(name)

    def link_index(self, name):
        for i, l in enumerate(self.links):
            if l.name == name:
                return i
        raise KeyError(name)

    def site(self, name):
        return self.sites[self.site_index[name]]

    def joint_limits(self):
        """(dof, 2) array stacking per-joint limits in q order."""
        return np.vstack([j.limits for j in self.joints])

    def ancestors(self, link):
        """Joint indices on the root-to-link path, root side first."""
        chain = []
        while self.link_joint[link] >= 0:
            j = self.link_joint[link]
            chain.append(j)
            parent = self.joints[j].parent_link
            if parent < 0:
                break
            link = parent
        return chain[::-1]


def _rotation_from(spec):
    if "rotvec" in spec:
        return exp_so3(np.asarray(spec["rotvec"], dtype=float))
    if "rpy" in spec:
        r, p, y = [float(v) for v in spec["rpy"]]
        return exp_so3([0, 0, y]) @ exp_so3([0, p, 0]) @ exp_so3([r, 0, 0])
    return np.eye(3)


def _parse_origin(raw):
    raw = raw or {}
    xyz = np.asarray(raw.get("xyz", [0.0, 0.0, 0.0]), dtype=float)
    if xyz.shape != (3,) or not np.all(np.isfinite(xyz)):
        raise ModelError("malformed transform: bad xyz")
    R = _rotation_from(raw)
    if not is_rotation(R, tol=1e-9):
        raise ModelError("malformed transform: rotation not orthonormal")
    return RigidTransform(R, xyz)


def _parse_inertia(raw):
    arr = np.asarray(raw, dtype=float)
    if arr.shape == (3,):
        arr = np.diag(arr)
    if arr.shape != (3, 3):
        raise ModelError("inertia must be a diagonal 3-list or 3x3 matrix")
    if not np.allclose(arr, arr.T, atol=1e-12):
        raise ModelError("inertia not symmetric")
    eig = np.linalg.eigvalsh(arr)
    if np.any(eig < -1e-12):
        raise ModelError("inertia not positive semi-definite")
    a, b, c = np.sort(eig)
    if c > a + b + 1e-12:
        raise ModelError("inertia violates the triangle inequality")
    return arr


def _parse_limits(kind, raw):
    arr = np.asarray(raw, dtype=float)
    if kind == "revolute":
        arr = arr.reshape(1, 2)
    if arr.shape != (JOINT_DOF[kind], 2):
        raise ModelError(f"limits for {kind} joint must be {JOINT_DOF[kind]} [lo, hi] pairs")
    if np.any(arr[:, 0] > arr[:, 1]):
        raise ModelError("joint limit lo > hi")
    return arr


def load_model(source) -> KinematicTree:
    """Parse a model document (YAML text, file object, or path).

    Link and joint ordering matches the document. Raises ModelError for
    cycles, duplicate names, non-unit axes, malformed transforms, or
    inconsistent references.
    """
    if hasattr(source, "read"):
        doc = yaml.safe_load(source)
    elif isinstance(source, str) and "\n" not in source and source.endswith((".yaml", ".yml")):
        with open(source, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    else:
        doc = yaml.safe_load(io.StringIO(source))
    if not isinstance(doc, dict) or "links" not in doc or "joints" not in doc:
        raise ModelError("document must contain links[] and joints[] sections")

    links = []
    names = set()
    for raw in doc["links"]:
        name = raw["name"]
        if name in names:
            raise ModelError(f"duplicate names: link {name!r}")
        names.add(name)
        mass = float(raw.get("mass", 0.0))
        if mass < 0:
            raise ModelError(f"link {name!r} has negative mass")
        com = np.asarray(raw.get("com", [0.0, 0.0, 0.0]), dtype=float)
        inertia = _parse_inertia(raw.get("inertia", [0.0, 0.0, 0.0]))
        links.append(LinkSpec(name, mass, com, inertia))
    link_ids = {l.name: i for i, l in enumerate(links)}

    joints = []
    jnames = set()
    root_links = []
    child_seen = set()
    for raw in doc["joints"]:
        name = raw["name"]
        if name in jnames:
            raise ModelError(f"duplicate names: joint {name!r}")
        jnames.add(name)
        kind = raw["kind"]
        if kind not in JOINT_DOF:
            raise ModelError(f"unknown joint kind {kind!r}")
        parent_name = raw["parent"]
        if parent_name == "world":
            parent = -1
        elif parent_name in link_ids:
            parent = link_ids[parent_name]
        else:
            raise ModelError(f"joint {name!r} references unknown parent {parent_name!r}")
        child_name = raw["child"]
        if child_name not in link_ids:
            raise ModelError(f"joint {name!r} references unknown child {child_name!r}")
        child = link_ids[child_name]
        if child in child_seen:
            raise ModelError(f"link {child_name!r} has two parent joints")
        child_seen.add(child)
        axis = None
        if kind == "revolute":
            axis = np.asarray(raw["axis"], dtype=float)
            if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
                raise ModelError(f"non-unit axis on joint {name!r}")
        origin = _parse_origin(raw.get("origin"))
        limits = _parse_limits(kind, raw["limits"])
        joints.append(JointSpec(name, kind, parent, child, origin, limits,
                                axis, int(raw.get("shape_group", -1))))
        if parent == -1:
            root_links.append(child)

    if len(root_links) != 1:
        raise ModelError("tree must have exactly one world-attached joint")
    if len(child_seen) != len(links):
        orphans = [l.name for i, l in enumerate(links) if i not in child_seen]
        raise ModelError(f"links without a parent joint: {orphans}")

    sites = []
    for raw in doc.get("sites", []):
        if raw["link"] not in link_ids:
            raise ModelError(f"site {raw['name']!r} on unknown link {raw['link']!r}")
        sites.append(SiteSpec(raw["name"], link_ids[raw["link"]],
                              np.asarray(raw.get("offset", [0, 0, 0]), dtype=float),
                              int(raw.get("shape_group", -1))))

    tree = KinematicTree(
        name=doc.get("name", "model"),
        links=links, joints=joints, sites=sites,
        root=root_links[0],
        dof=sum(j.dof for j in joints),
        meta=doc.get("meta", {}),
        servo=doc.get("servo", {}),
    )
    _finalize(tree)
    return tree


def _finalize(tree):
    off = 0
    tree.q_slices = []
    for j in tree.joints:
        tree.q_slices.append(slice(off, off + j.dof))
        off += j.dof
    tree.link_joint = [-1] * len(tree.links)
    for ji, j in enumerate(tree.joints):
        tree.link_joint[j.child_link] = ji

    # topological order with cycle detection
    order = []
    state = [0] * len(tree.links)   # 0 unvisited, 1 in progress, 2 done

    def visit(link):
        if state[link] == 2:
            return
        if state[link] == 1:
            raise ModelError("cycle detected in joint parent graph")
        state[link] = 1
        ji = tree.link_joint[link]
        parent = tree.joints[ji].parent_link
        if parent >= 0:
            visit(parent)
        state[link] = 2
        order.append(link)

    for link in range(len(tree.links)):
        visit(link)
    tree.order = order
    tree.site_index = {s.name: i for i, s in enumerate(tree.sites)}


def builtin_model(name) -> KinematicTree:
    """Load one of the shipped models: 'human_hand' or 'robot_hand_30dof'."""
    from importlib import resources

    ref = resources.files("handpipe.kinematics") / "models" / f"{name}.yaml"
    return load_model(ref.read_text(encoding="utf-8"))


@dataclass
class HandPose:
    """Hand parameters: 15 ball-joint rotations, bone-scale vector, root pose."""

    theta: np.ndarray            # (45,) axis-angle triples, finger-major
    beta: np.ndarray             # (10,) bone-group scales in (0.5, 2.0)
    root: RigidTransform

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.beta = np.asarray(self.beta, dtype=float)
        if self.theta.shape != (45,):
            raise ValueError("theta must have shape (45,)")
        if self.beta.shape != (10,):
            raise ValueError("beta must have shape (10,)")
        if np.any(self.beta <= 0.5) or np.any(self.beta >= 2.0):
            raise ValueError("beta entries must lie in (0.5, 2.0)")
        if not self.root.is_valid(tol=1e-8):
            raise ValueError("root is not a valid rigid transform")

    @classmethod
    def rest(cls):
        return cls(np.zeros(45), np.ones(10), RigidTransform.identity())

    def copy(self):
        return HandPose(self.theta.copy(), self.beta.copy(), self.root.copy())
