"""Desk-scale manipulation environments with simplified contact.

Robot model: 30 decoupled unit-inertia position servos (torque
kp*(target-q) - kd*qdot), integrated exactly over the 5 x 2 ms frame as the
closed-form composite of semi-implicit Euler substeps; the robot itself is
gravity-compensated. Objects are rigid proxies: ballistic when free (with a
dissipative table contact), rigidly attached to the palm while the grasp
predicate holds. Grasp: at least two fingertips with opposing approach
directions within the grasp margin of the object surface while the fingers
close; released on proximity loss (with hysteresis) or fast opening.

All state arrays carry a leading batch axis and every operation is
elementwise or a per-row reduction, so stepping a batch of B environments
is bitwise identical to stepping them one at a time.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from ..demogen.actions import ServoParams, denormalize_action
from ..kinematics import builtin_model
from ..so3 import hat
from .config import (CONTAINER, CONTROL_DT, HOME_FINGERS, HOME_ROOT,
                     MUG_RECEPTACLE, N_PARTICLES, PARTICLE_RADIUS, EnvConfig)
from .score import inside_score, points_in_cylinder

ATTACH_MARGIN = 0.05
HOLD_MARGIN = 0.075
OPPOSE_DOT = 0.05
CLOSE_VEL = 0.1
OPEN_VEL = -1.2
LIFT_EPS = 0.03
POUR_TILT = 1.4
POUR_RELEASE_PER_STEP = 4

FINGERS = ("thumb", "index", "middle", "ring", "pinky")


def _batched_exp(w):
    """(B,3) axis-angle -> (B,3,3) rotation matrices."""
    w = np.asarray(w, dtype=float)
    theta = np.sqrt(np.sum(w * w, axis=-1))
    small = theta < 1e-12
    th = np.where(small, 1.0, theta)
    k = w / th[:, None]
    K = np.zeros(w.shape[:-1] + (3, 3))
    K[..., 0, 1] = -k[..., 2]
    K[..., 0, 2] = k[..., 1]
    K[..., 1, 0] = k[..., 2]
    K[..., 1, 2] = -k[..., 0]
    K[..., 2, 0] = -k[..., 1]
    K[..., 2, 1] = k[..., 0]
    K2 = np.einsum("...ij,...jk->...ik", K, K)
    s = np.sin(theta)[..., None, None]
    c = (1.0 - np.cos(theta))[..., None, None]
    R = np.eye(3) + s * K + c * K2
    R[small] = np.eye(3) + hat(np.zeros(3))
    if np.any(small):
        R[small] = np.eye(3)
    return R


class _FkProgram:
    """Flattened batched FK over the robot tree, producing the palm frame
    and the five fingertip positions."""

    def __init__(self, tree):
        self.tree = tree
        self.steps = []
        for link in tree.order:
            ji = tree.link_joint[link]
            j = tree.joints[ji]
            axis = j.axis if j.kind == "revolute" else None
            K = hat(axis) if axis is not None else None
            self.steps.append(dict(
                link=link, parent=j.parent_link, kind=j.kind,
                Ro=j.origin.rotation, to=j.origin.translation,
                K=K, K2=None if K is None else K @ K,
                sl=tree.q_slices[ji]))
        self.tip_sites = [(tree.site(f"{f}_tip").link, tree.site(f"{f}_tip").offset)
                          for f in FINGERS]
        self.root_link = tree.root

    def run(self, q):
        """q: (B, dof) -> (palm_R (B,3,3), palm_p (B,3), tips (B,5,3))."""
        B = q.shape[0]
        R = [None] * len(self.tree.links)
        p = [None] * len(self.tree.links)
        for st in self.steps:
            if st["parent"] < 0:
                Rp = np.broadcast_to(np.eye(3), (B, 3, 3))
                pp = np.zeros((B, 3))
            else:
                Rp = R[st["parent"]]
                pp = p[st["parent"]]
            R_pre = np.einsum("bij,jk->bik", Rp, st["Ro"])
            p_origin = pp + np.einsum("bij,j->bi", Rp, st["to"])
            if st["kind"] == "free":
                sl = st["sl"]
                t = q[:, sl.start:sl.start + 3]
                Rj = _batched_exp(q[:, sl.start + 3:sl.stop])
                p_origin = p_origin + np.einsum("bij,bj->bi", R_pre, t)
            else:
                ang = q[:, st["sl"].start]
                s = np.sin(ang)[:, None, None]
                c = (1.0 - np.cos(ang))[:, None, None]
                Rj = np.eye(3) + s * st["K"] + c * st["K2"]
            R[st["link"]] = np.einsum("bij,bjk->bik", R_pre, Rj)
            p[st["link"]] = p_origin
        tips = np.stack([p[l] + np.einsum("bij,j->bi", R[l], off)
                         for l, off in self.tip_sites], axis=1)
        return R[self.root_link], p[self.root_link], tips


def _servo_gains(kp, kd, dt, frame_skip):
    """Closed-form composite of frame_skip semi-implicit Euler substeps of
    the unit-inertia servo; returns the 2x2 map and input column."""
    A = np.array([[1.0 - dt * dt * kp, dt * (1.0 - dt * kd)],
                  [-dt * kp, 1.0 - dt * kd]])
    Bc = np.array([dt * dt * kp, dt * kp])
    A5 = np.eye(2)
    B5 = np.zeros(2)
    for _ in range(frame_skip):
        B5 = A @ B5 + Bc
        A5 = A @ A5
    return A5, B5


@dataclass
class EnvState:
    """Single-environment snapshot (see the batched arrays for training)."""
    q: np.ndarray
    qdot: np.ndarray
    obj_pos: np.ndarray
    obj_rot: np.ndarray
    obj_vel: np.ndarray
    attached: bool
    target: np.ndarray
    container_pos: np.ndarray
    particles: np.ndarray | None
    particle_state: np.ndarray | None
    step_count: int


class DeskEnv:
    """Batched desk-scale environment for relocate / pour / place_inside."""

    def __init__(self, cfg: EnvConfig, batch=1):
        self.cfg = cfg
        self.batch = batch
        self.tree = builtin_model("robot_hand_30dof")
        self.servo = ServoParams.from_tree(self.tree)
        kp = float(self.servo.kp[0])
        kd = float(self.servo.kd[0])
        self.A5, self.B5 = _servo_gains(kp, kd, cfg.dt, cfg.frame_skip)
        self.fk = _FkProgram(self.tree)
        self.obj = cfg.object_spec
        self.gravity = np.asarray(cfg.gravity, dtype=float)
        self._warned_clip = False

        # flexion dofs (y-axis finger joints) for the closing measure
        flex = []
        for name in ("ffj2", "ffj1", "ffj0", "mfj2", "mfj1", "mfj0",
                     "rfj2", "rfj1", "rfj0", "thj2", "thj1", "thj0",
                     "lfj2", "lfj1", "lfj0"):
            flex.append(self.tree.q_slices[self.tree.joint_index(name)].start)
        self.flex_idx = np.array(flex)

        self.q_home = np.concatenate([HOME_ROOT, HOME_FINGERS])

        B = batch
        self.q = np.tile(self.q_home, (B, 1))
        self.qd = np.zeros((B, 30))
        self.obj_pos = np.zeros((B, 3))
        self.obj_rot = np.tile(np.eye(3), (B, 1, 1))
        self.obj_vel = np.zeros((B, 3))
        self.attached = np.zeros(B, dtype=bool)
        self.rel_pos = np.zeros((B, 3))
        self.rel_rot = np.tile(np.eye(3), (B, 1, 1))
        self.target = np.zeros((B, 3))
        self.container_pos = np.zeros((B, 3))
        self.steps = np.zeros(B, dtype=int)
        self.palm_p = np.zeros((B, 3))
        self.palm_R = np.tile(np.eye(3), (B, 1, 1))
        self.tips = np.zeros((B, 5, 3))
        if cfg.task == "pour":
            self.particles = np.zeros((B, N_PARTICLES, 3))
            self.particle_vel = np.zeros((B, N_PARTICLES, 3))
            self.particle_state = np.zeros((B, N_PARTICLES), dtype=int)
            self.particle_rel = self._particle_lattice()
        else:
            self.particles = None
            self.particle_vel = None
            self.particle_state = None

    # ------------------------------------------------------------- reset

    def _particle_lattice(self):
        """Fixed particle positions in the mug frame."""
        r_mug, h_mug = self.obj.dims
        pts = []
        grid = np.linspace(-0.45 * r_mug, 0.45 * r_mug, 4)
        heights = np.linspace(-0.35 * h_mug, 0.05 * h_mug, 2)
        for z in heights:
            for x in grid:
                for y in grid:
                    pts.append([x, y, z])
        return np.asarray(pts[:N_PARTICLES])

    def reset(self, seeds):
        """Reset every row from its own seed; returns observations (B, obs)."""
        if np.isscalar(seeds):
            seeds = [seeds] * self.batch
        if len(seeds) != self.batch:
            raise ValueError("need one seed per environment row")
        for b, seed in enumerate(seeds):
            self._reset_row(b, seed)
        self._update_fk()
        return self._observe()

    def _reset_row(self, b, seed):
        rng = np.random.default_rng(seed)
        cfg = self.cfg
        self.q[b] = self.q_home
        self.qd[b] = 0.0
        self.obj_rot[b] = np.eye(3)
        self.obj_vel[b] = 0.0
        self.attached[b] = False
        self.steps[b] = 0
        if cfg.task == "relocate":
            oxy = rng.uniform(-0.3, 0.3, size=2)
            txy = rng.uniform(-0.3, 0.3, size=2)
            tz = rng.uniform(0.15, 0.25)
            self.obj_pos[b] = [oxy[0], oxy[1], self.obj.rest_height]
            self.target[b] = [txy[0], txy[1], tz]
            self.container_pos[b] = 0.0
        elif cfg.task == "pour":
            oxy = rng.uniform(-0.1, 0.1, size=2)
            self.obj_pos[b] = [oxy[0], oxy[1], self.obj.rest_height]
            self.container_pos[b] = [0.0, 0.0, CONTAINER["height"] / 2]
            self.target[b] = self.container_pos[b]
            self.particles[b] = self.particle_rel + self.obj_pos[b]
            self.particle_vel[b] = 0.0
            self.particle_state[b] = 0
        else:  # place_inside
            oxy = rng.uniform(-0.15, 0.15, size=2)
            self.obj_pos[b] = [oxy[0], oxy[1], self.obj.rest_height]
            # the capsule axis is local +x, so identity means lying flat
            self.obj_rot[b] = np.eye(3)
            self.container_pos[b] = [0.0, 0.0, MUG_RECEPTACLE["height"] / 2]
            self.target[b] = self.container_pos[b]

    # -------------------------------------------------------------- step

    def step(self, actions):
        """actions (B, 30) in [-1, 1]; returns (obs, reward, done, info)."""
        a = np.asarray(actions, dtype=float)
        if a.ndim == 1:
            a = a[None, :]
        clip_mask = np.abs(a) > 1.0 + 1e-12
        n_clip = int(clip_mask.sum())
        if n_clip and not self._warned_clip:
            warnings.warn("action outside [-1, 1]; clipping", stacklevel=2)
            self._warned_clip = True
        a = np.clip(a, -1.0, 1.0)
        if not np.all(np.isfinite(a)):
            raise FloatingPointError("non-finite action")
        u = denormalize_action(a, self.servo)

        # exact composite servo integration, then box clamp
        q_new = self.A5[0, 0] * self.q + self.A5[0, 1] * self.qd + self.B5[0] * u
        qd_new = self.A5[1, 0] * self.q + self.A5[1, 1] * self.qd + self.B5[1] * u
        lo, hi = self.servo.lo, self.servo.hi
        clamped = (q_new < lo) | (q_new > hi)
        q_new = np.clip(q_new, lo, hi)
        qd_new = np.where(clamped, 0.0, qd_new)
        self.q = q_new
        self.qd = qd_new

        prev_palm = self.palm_p.copy()
        self._update_fk()
        palm_vel = (self.palm_p - prev_palm) / CONTROL_DT

        self._object_update()
        if self.cfg.task == "pour":
            self._particle_update()
        self._grasp_update()

        reward = self._reward()
        self.steps += 1
        done = self.steps >= self.cfg.horizon
        if not (np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.obj_pos))):
            raise FloatingPointError("non-finite state after integration")
        info = {"clip_count": n_clip, "attached": self.attached.copy(),
                "palm_vel": palm_vel}
        return self._observe(), reward, done.copy(), info

    def _update_fk(self):
        self.palm_R, self.palm_p, self.tips = self.fk.run(self.q)

    def _object_update(self):
        att = self.attached
        free = ~att
        # attached: rigid follow of the palm frame
        if np.any(att):
            new_pos = (np.einsum("bij,bj->bi", self.palm_R, self.rel_pos)
                       + self.palm_p)
            new_rot = np.einsum("bij,bjk->bik", self.palm_R, self.rel_rot)
            vel = (new_pos - self.obj_pos) / CONTROL_DT
            self.obj_pos = np.where(att[:, None], new_pos, self.obj_pos)
            self.obj_vel = np.where(att[:, None], vel, self.obj_vel)
            upd = np.where(att[:, None, None], new_rot, self.obj_rot)
            self.obj_rot = upd
        # free: semi-implicit ballistic step plus dissipative support contact
        if np.any(free):
            v = self.obj_vel + self.gravity * CONTROL_DT
            pos = self.obj_pos + v * CONTROL_DT
            rest = self._support_height(pos)
            below = pos[:, 2] <= rest
            vxy_scale = np.where(below, np.maximum(0.0, 1.0 - 0.8 * self.cfg.friction), 1.0)
            v = np.column_stack([v[:, 0] * vxy_scale, v[:, 1] * vxy_scale,
                                 np.where(below, 0.0, v[:, 2])])
            pos[:, 2] = np.maximum(pos[:, 2], rest)
            self.obj_pos = np.where(free[:, None], pos, self.obj_pos)
            self.obj_vel = np.where(free[:, None], v, self.obj_vel)

    def _support_height(self, pos):
        """Rest height of the object center over its current support."""
        if self.cfg.task == "place_inside":
            # inside the mug the banana rests on the interior base
            rxy = np.hypot(pos[:, 0] - self.container_pos[:, 0],
                           pos[:, 1] - self.container_pos[:, 1])
            inside = rxy < MUG_RECEPTACLE["r_inner"]
            axis_z = np.abs(self.obj_rot[:, 2, 0])   # banana local +x in world z
            half = self.obj.dims[1] / 2 + self.obj.dims[0]
            extent = axis_z * (self.obj.dims[1] / 2) + self.obj.dims[0]
            return np.where(inside, MUG_RECEPTACLE["base"] + extent,
                            np.where(axis_z > 0.9, extent, self.obj.rest_height))
        return np.full(len(pos), self.obj.rest_height)

    def _grasp_update(self):
        d_surf = np.linalg.norm(self.tips - self.obj_pos[:, None, :], axis=2) \
            - self.obj.grasp_radius
        near_attach = d_surf < ATTACH_MARGIN
        near_hold = d_surf < HOLD_MARGIN
        dirs = self.tips - self.obj_pos[:, None, :]
        dirs = dirs / np.maximum(np.linalg.norm(dirs, axis=2, keepdims=True), 1e-9)
        # opposing pair among near tips
        dots = np.einsum("bik,bjk->bij", dirs, dirs)
        pair_ok = (dots < OPPOSE_DOT) & near_attach[:, :, None] & near_attach[:, None, :]
        opposing = pair_ok.any(axis=(1, 2))
        closing = self.qd[:, self.flex_idx].mean(axis=1)

        attach = (~self.attached & (near_attach.sum(axis=1) >= 2) & opposing
                  & (closing > CLOSE_VEL))
        detach = self.attached & ((near_hold.sum(axis=1) < 2)
                                  | (closing < OPEN_VEL))
        if np.any(attach):
            inv_R = np.swapaxes(self.palm_R, 1, 2)
            rel_p = np.einsum("bij,bj->bi", inv_R, self.obj_pos - self.palm_p)
            rel_R = np.einsum("bij,bjk->bik", inv_R, self.obj_rot)
            self.rel_pos = np.where(attach[:, None], rel_p, self.rel_pos)
            self.rel_rot = np.where(attach[:, None, None], rel_R, self.rel_rot)
            self.attached = self.attached | attach
        if np.any(detach):
            self.attached = self.attached & ~detach

    # ------------------------------------------------------- pour details

    def _particle_update(self):
        held = self.particle_state == 0
        flying = self.particle_state == 1
        # held particles ride the mug
        world = (np.einsum("bij,bpj->bpi", self.obj_rot, self.particle_rel[None])
                 + self.obj_pos[:, None, :])
        self.particles = np.where(held[:, :, None], world, self.particles)
        # release when the mug tilts past the pour angle, a few per step
        up_z = self.obj_rot[:, 2, 2]
        tilted = np.arccos(np.clip(up_z, -1.0, 1.0)) > POUR_TILT
        for b in np.nonzero(tilted)[0]:
            idx = np.nonzero(held[b])[0][:POUR_RELEASE_PER_STEP]
            if idx.size:
                self.particle_state[b, idx] = 1
                self.particle_vel[b, idx] = self.obj_vel[b]
        # ballistic flight and landing
        flying = self.particle_state == 1
        if np.any(flying):
            v = self.particle_vel + self.gravity * CONTROL_DT
            pos = self.particles + v * CONTROL_DT
            landed = pos[:, :, 2] <= PARTICLE_RADIUS
            in_cont = points_in_cylinder(
                pos, (0.0, 0.0), CONTAINER["r_inner"], -np.inf, np.inf)
            state = self.particle_state.copy()
            newly = flying & landed
            state[newly & in_cont] = 2
            state[newly & ~in_cont] = 3
            pos[:, :, 2] = np.where(landed & flying,
                                    np.where(in_cont, CONTAINER["base"] + PARTICLE_RADIUS,
                                             PARTICLE_RADIUS),
                                    pos[:, :, 2])
            self.particles = np.where(flying[:, :, None], pos, self.particles)
            self.particle_vel = np.where((flying & ~landed)[:, :, None], v, 0.0)
            self.particle_state = state

    def pour_fraction(self):
        if self.cfg.task != "pour":
            raise ValueError("pour_fraction only applies to the pour task")
        inside = points_in_cylinder(self.particles, (0.0, 0.0),
                                    CONTAINER["r_inner"], 0.0,
                                    CONTAINER["height"])
        return inside.mean(axis=1)

    # ----------------------------------------------------------- rewards

    def _lifted(self):
        return self.attached & (self.obj_pos[:, 2] > self.obj.rest_height + LIFT_EPS)

    def _reward(self):
        w = self.cfg.weights
        d_ho = np.linalg.norm(self.palm_p + self._grasp_offset() - self.obj_pos,
                              axis=1)
        lifted = self._lifted().astype(float)
        if self.cfg.task == "relocate":
            d_ht = np.linalg.norm(self.palm_p + self._grasp_offset() - self.target,
                                  axis=1)
            d_ot = np.linalg.norm(self.obj_pos - self.target, axis=1)
            return (-w.reach * d_ho - w.carry_hand * d_ht * lifted
                    - w.carry_obj * d_ot * lifted + w.lift_bonus * lifted)
        if self.cfg.task == "pour":
            pour_pt = self.container_pos + np.array([0.0, 0.0, 0.18])
            d_op = np.linalg.norm(self.obj_pos - pour_pt, axis=1)
            frac = self.pour_fraction()
            return (10.0 * w.pour_main * frac - w.reach * d_ho
                    - w.carry_obj * d_op * lifted + w.lift_bonus * lifted)
        # place_inside
        above = self.container_pos + np.array([0.0, 0.0, 0.20])
        d_oa = np.linalg.norm(self.obj_pos - above, axis=1)
        rxy = np.hypot(self.obj_pos[:, 0] - self.container_pos[:, 0],
                       self.obj_pos[:, 1] - self.container_pos[:, 1])
        in_xy = (rxy < MUG_RECEPTACLE["r_inner"]).astype(float)
        depth = np.clip((MUG_RECEPTACLE["height"] - self.obj_pos[:, 2])
                        / MUG_RECEPTACLE["height"], 0.0, 1.0)
        proxy = in_xy * depth
        return (10.0 * w.inside_main * proxy - w.reach * d_ho
                - w.carry_obj * d_oa * lifted + w.lift_bonus * lifted)

    def _grasp_offset(self):
        """Palm-frame offset of the nominal grasp center, in world frame."""
        off = np.array([0.10, 0.01, -0.05])
        return np.einsum("bij,j->bi", self.palm_R, off)

    # ------------------------------------------------------ observations

    def _observe(self):
        root_pos = self.q[:, 0:3]
        if self.cfg.task == "relocate":
            return np.concatenate([self.q, root_pos, self.obj_pos, self.target],
                                  axis=1)
        quat = _batched_quat(self.obj_rot)
        return np.concatenate([self.q, root_pos, self.obj_pos, quat,
                               self.container_pos], axis=1)

    # --------------------------------------------------------- metrics

    def success_relocate(self):
        d = np.linalg.norm(self.obj_pos - self.target, axis=1)
        return d < 0.1

    def final_metric(self):
        """Per-task episode metric: success flag, pour fraction, inside score."""
        if self.cfg.task == "relocate":
            return self.success_relocate().astype(float)
        if self.cfg.task == "pour":
            return self.pour_fraction()
        r, cl = self.obj.dims
        return np.array([inside_score(self.obj_rot[b], self.obj_pos[b], r, cl)
                         for b in range(self.batch)])

    def state(self, b=0) -> EnvState:
        return EnvState(
            q=self.q[b].copy(), qdot=self.qd[b].copy(),
            obj_pos=self.obj_pos[b].copy(), obj_rot=self.obj_rot[b].copy(),
            obj_vel=self.obj_vel[b].copy(), attached=bool(self.attached[b]),
            target=self.target[b].copy(),
            container_pos=self.container_pos[b].copy(),
            particles=None if self.particles is None else self.particles[b].copy(),
            particle_state=(None if self.particle_state is None
                            else self.particle_state[b].copy()),
            step_count=int(self.steps[b]))


def _batched_quat(R):
    """(B,3,3) -> (B,4) wxyz quaternions (per-row scalar path)."""
    from ..so3 import quat_from_matrix
    return np.stack([quat_from_matrix(R[b]) for b in range(R.shape[0])])


def make_env(cfg: EnvConfig, batch=1) -> DeskEnv:
    return DeskEnv(cfg, batch)


def is_success_relocate(state: EnvState) -> bool:
    """Strictly-inside-0.1 rule on the final object-target distance."""
    return bool(np.linalg.norm(state.obj_pos - state.target) < 0.1)
