"""Recursive Newton-Euler inverse dynamics over a kinematic tree.

Velocity convention: revolute entries of qdot/qddot are joint angle rates.
For ball and free joints the three rotational entries hold the joint-frame
(child-frame) angular velocity and acceleration, NOT the time derivatives
of the axis-angle coordinates; `coordinate_rates_to_joint` converts spline
coordinate rates into this convention via the SO(3) right Jacobian. Free
joints are supported at the tree root only, with translation rates taken in
the joint origin frame.

Gravity enters as a fictitious base acceleration, the standard trick that
makes the same recursion produce gravity load terms exactly.
"""

import numpy as np

from ..so3 import exp_so3, right_jacobian


def inverse_dynamics(tree, q, qdot, qddot, gravity=(0.0, 0.0, -9.81)):
    """Generalized forces realizing (q, qdot, qddot) for rigid links."""
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    qddot = np.asarray(qddot, dtype=float)
    if q.shape != (tree.dof,) or qdot.shape != (tree.dof,) or qddot.shape != (tree.dof,):
        raise ValueError("q, qdot, qddot must all have length tree.dof")
    g = np.asarray(gravity, dtype=float)

    nl = len(tree.links)
    omega = np.zeros((nl, 3))       # link angular velocity, link frame
    domega = np.zeros((nl, 3))
    acc = np.zeros((nl, 3))         # linear acceleration of the link origin
    rot_pc = np.zeros((nl, 3, 3))   # parent->child rotation
    off_pc = np.zeros((nl, 3))      # child origin offset in parent frame
    F = np.zeros((nl, 3))
    N = np.zeros((nl, 3))

    for link in tree.order:
        ji = tree.link_joint[link]
        joint = tree.joints[ji]
        sl = tree.q_slices[ji]
        parent = joint.parent_link
        if parent >= 0:
            w_p, dw_p, a_p = omega[parent], domega[parent], acc[parent]
        else:
            w_p = np.zeros(3)
            dw_p = np.zeros(3)
            a_p = -g

        Ro = joint.origin.rotation
        to = joint.origin.translation
        if joint.kind == "revolute":
            Rm = exp_so3(joint.axis * q[sl][0])
            R = Ro @ Rm
            d = to
            w_j = joint.axis * qdot[sl][0]
            dw_j = joint.axis * qddot[sl][0]
            dd_vel = np.zeros(3)
            dd_acc = np.zeros(3)
        elif joint.kind == "ball":
            Rm = exp_so3(q[sl])
            R = Ro @ Rm
            d = to
            w_j = qdot[sl]
            dw_j = qddot[sl]
            dd_vel = np.zeros(3)
            dd_acc = np.zeros(3)
        else:  # free
            if parent >= 0:
                raise NotImplementedError("free joints supported at the root only")
            t = q[sl][0:3]
            Rm = exp_so3(q[sl][3:6])
            R = Ro @ Rm
            d = to + Ro @ t
            w_j = qdot[sl][3:6]
            dw_j = qddot[sl][3:6]
            dd_vel = Ro @ qdot[sl][0:3]
            dd_acc = Ro @ qddot[sl][0:3]

        Rt = R.T
        w = Rt @ w_p + w_j
        dw = Rt @ dw_p + np.cross(Rt @ w_p, w_j) + dw_j
        a = Rt @ (a_p + np.cross(dw_p, d) + np.cross(w_p, np.cross(w_p, d))
                  + 2.0 * np.cross(w_p, dd_vel) + dd_acc)

        omega[link] = w
        domega[link] = dw
        acc[link] = a
        rot_pc[link] = R
        off_pc[link] = d

        spec = tree.links[link]
        c = spec.com
        a_c = a + np.cross(dw, c) + np.cross(w, np.cross(w, c))
        F[link] = spec.mass * a_c
        N[link] = spec.inertia @ dw + np.cross(w, spec.inertia @ w)

    children = [[] for _ in range(nl)]
    for link in range(nl):
        p = tree.joints[tree.link_joint[link]].parent_link
        if p >= 0:
            children[p].append(link)

    f = np.zeros((nl, 3))
    n = np.zeros((nl, 3))
    tau = np.zeros(tree.dof)
    for link in reversed(tree.order):
        fi = F[link].copy()
        ni = N[link] + np.cross(tree.links[link].com, F[link])
        for ch in children[link]:
            fc = rot_pc[ch] @ f[ch]
            fi += fc
            ni += rot_pc[ch] @ n[ch] + np.cross(off_pc[ch], fc)
        f[link] = fi
        n[link] = ni
        joint = tree.joints[tree.link_joint[link]]
        sl = tree.q_slices[tree.link_joint[link]]
        if joint.kind == "revolute":
            # the axis is invariant under its own rotation, so its child-frame
            # components equal the origin-frame ones
            tau[sl] = joint.axis @ n[link]
        elif joint.kind == "ball":
            tau[sl] = n[link]
        else:  # free at root
            Rm = exp_so3(q[sl][3:6])
            tau[sl.start:sl.start + 3] = Rm @ f[link]
            tau[sl.start + 3:sl.stop] = n[link]
    return tau


def _bexp(w):
    """(T,3) axis-angle -> (T,3,3), Rodrigues with small-angle fallback."""
    w = np.atleast_2d(np.asarray(w, dtype=float))
    theta = np.linalg.norm(w, axis=1)
    small = theta < 1e-12
    th = np.where(small, 1.0, theta)
    k = w / th[:, None]
    K = np.zeros((w.shape[0], 3, 3))
    K[:, 0, 1], K[:, 0, 2] = -k[:, 2], k[:, 1]
    K[:, 1, 0], K[:, 1, 2] = k[:, 2], -k[:, 0]
    K[:, 2, 0], K[:, 2, 1] = -k[:, 1], k[:, 0]
    K2 = np.einsum("tij,tjk->tik", K, K)
    s = np.sin(theta)[:, None, None]
    c = (1.0 - np.cos(theta))[:, None, None]
    R = np.eye(3) + s * K + c * K2
    R[small] = np.eye(3)
    return R


def inverse_dynamics_batch(tree, Q, Qd, Qdd, gravity=(0.0, 0.0, -9.81)):
    """inverse_dynamics over (T, dof) arrays; identical recursion with the
    time axis vectorized (elementwise ops and per-row cross products only)."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    Qd = np.atleast_2d(np.asarray(Qd, dtype=float))
    Qdd = np.atleast_2d(np.asarray(Qdd, dtype=float))
    T = Q.shape[0]
    g = np.asarray(gravity, dtype=float)
    nl = len(tree.links)
    omega = np.zeros((nl, T, 3))
    domega = np.zeros((nl, T, 3))
    acc = np.zeros((nl, T, 3))
    rot_pc = np.zeros((nl, T, 3, 3))
    off_pc = np.zeros((nl, T, 3))
    F = np.zeros((nl, T, 3))
    N = np.zeros((nl, T, 3))

    for link in tree.order:
        ji = tree.link_joint[link]
        joint = tree.joints[ji]
        sl = tree.q_slices[ji]
        parent = joint.parent_link
        if parent >= 0:
            w_p, dw_p, a_p = omega[parent], domega[parent], acc[parent]
        else:
            w_p = np.zeros((T, 3))
            dw_p = np.zeros((T, 3))
            a_p = np.tile(-g, (T, 1))
        Ro, to = joint.origin.rotation, joint.origin.translation
        if joint.kind == "revolute":
            ang = Q[:, sl.start]
            K = np.array([[0.0, -joint.axis[2], joint.axis[1]],
                          [joint.axis[2], 0.0, -joint.axis[0]],
                          [-joint.axis[1], joint.axis[0], 0.0]])
            Rm = (np.eye(3) + np.sin(ang)[:, None, None] * K
                  + (1 - np.cos(ang))[:, None, None] * (K @ K))
            R = np.einsum("ij,tjk->tik", Ro, Rm)
            d = np.tile(to, (T, 1))
            w_j = joint.axis * Qd[:, sl.start][:, None]
            dw_j = joint.axis * Qdd[:, sl.start][:, None]
            dd_vel = np.zeros((T, 3))
            dd_acc = np.zeros((T, 3))
        elif joint.kind == "ball":
            Rm = _bexp(Q[:, sl])
            R = np.einsum("ij,tjk->tik", Ro, Rm)
            d = np.tile(to, (T, 1))
            w_j = Qd[:, sl]
            dw_j = Qdd[:, sl]
            dd_vel = np.zeros((T, 3))
            dd_acc = np.zeros((T, 3))
        else:
            if parent >= 0:
                raise NotImplementedError("free joints supported at the root only")
            t3 = Q[:, sl.start:sl.start + 3]
            Rm = _bexp(Q[:, sl.start + 3:sl.stop])
            R = np.einsum("ij,tjk->tik", Ro, Rm)
            d = to + t3 @ Ro.T
            w_j = Qd[:, sl.start + 3:sl.stop]
            dw_j = Qdd[:, sl.start + 3:sl.stop]
            dd_vel = Qd[:, sl.start:sl.start + 3] @ Ro.T
            dd_acc = Qdd[:, sl.start:sl.start + 3] @ Ro.T
        Rt_wp = np.einsum("tji,tj->ti", R, w_p)
        w = Rt_wp + w_j
        dw = np.einsum("tji,tj->ti", R, dw_p) + np.cross(Rt_wp, w_j) + dw_j
        a = np.einsum("tji,tj->ti",
                      R, a_p + np.cross(dw_p, d) + np.cross(w_p, np.cross(w_p, d))
                      + 2.0 * np.cross(w_p, dd_vel) + dd_acc)
        omega[link], domega[link], acc[link] = w, dw, a
        rot_pc[link], off_pc[link] = R, d
        spec = tree.links[link]
        a_c = a + np.cross(dw, spec.com) + np.cross(w, np.cross(w, spec.com))
        F[link] = spec.mass * a_c
        N[link] = dw @ spec.inertia.T + np.cross(w, w @ spec.inertia.T)

    children = [[] for _ in range(nl)]
    for link in range(nl):
        p = tree.joints[tree.link_joint[link]].parent_link
        if p >= 0:
            children[p].append(link)
    f = np.zeros((nl, T, 3))
    n = np.zeros((nl, T, 3))
    tau = np.zeros((T, tree.dof))
    for link in reversed(tree.order):
        fi = F[link].copy()
        ni = N[link] + np.cross(tree.links[link].com, F[link])
        for ch in children[link]:
            fc = np.einsum("tij,tj->ti", rot_pc[ch], f[ch])
            fi += fc
            ni += np.einsum("tij,tj->ti", rot_pc[ch], n[ch]) \
                + np.cross(off_pc[ch], fc)
        f[link] = fi
        n[link] = ni
        joint = tree.joints[tree.link_joint[link]]
        sl = tree.q_slices[tree.link_joint[link]]
        if joint.kind == "revolute":
            tau[:, sl.start] = n[link] @ joint.axis
        elif joint.kind == "ball":
            tau[:, sl] = n[link]
        else:
            Rm = _bexp(Q[:, sl.start + 3:sl.stop])
            tau[:, sl.start:sl.start + 3] = np.einsum("tij,tj->ti", Rm, f[link])
            tau[:, sl.start + 3:sl.stop] = n[link]
    return tau


def coordinate_rates_to_joint(tree, q, qd, qdd, h=1e-6):
    """Convert axis-angle coordinate rates to joint-frame angular rates.

    Applies omega = J_r(w) wdot per ball/free rotational block; the right
    Jacobian's time derivative is taken by central differences along wdot.
    """
    qd_j = np.asarray(qd, dtype=float).copy()
    qdd_j = np.asarray(qdd, dtype=float).copy()
    for ji, joint in enumerate(tree.joints):
        sl = tree.q_slices[ji]
        if joint.kind == "ball":
            rs = slice(sl.start, sl.stop)
        elif joint.kind == "free":
            rs = slice(sl.start + 3, sl.stop)
        else:
            continue
        w = np.asarray(q[rs], dtype=float)
        wd = np.asarray(qd[rs], dtype=float)
        wdd = np.asarray(qdd[rs], dtype=float)
        Jr = right_jacobian(w)
        dJr = (right_jacobian(w + h * wd) - right_jacobian(w - h * wd)) / (2.0 * h)
        qd_j[rs] = Jr @ wd
        qdd_j[rs] = Jr @ wdd + dJr @ wd
    return qd_j, qdd_j


def joint_torque_to_coordinates(tree, q, tau):
    """Pull joint-frame rotational torques back to coordinate space
    (tau_w = J_r^T n)."""
    out = np.asarray(tau, dtype=float).copy()
    for ji, joint in enumerate(tree.joints):
        sl = tree.q_slices[ji]
        if joint.kind == "ball":
            rs = slice(sl.start, sl.stop)
        elif joint.kind == "free":
            rs = slice(sl.start + 3, sl.stop)
        else:
            continue
        out[rs] = right_jacobian(q[rs]).T @ tau[rs]
    return out


def mass_matrix(tree, q, gravity=(0.0, 0.0, 0.0)):
    """Generalized inertia via unit-acceleration inverse dynamics columns."""
    n = tree.dof
    zero = np.zeros(n)
    bias = inverse_dynamics(tree, q, zero, zero, gravity)
    M = np.zeros((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        M[:, k] = inverse_dynamics(tree, q, zero, e, gravity) - bias
    return M


def forward_dynamics(tree, q, qdot, tau, gravity=(0.0, 0.0, -9.81),
                     free_dofs=None):
    """qddot from tau, for the dynamics consistency checks.

    free_dofs optionally masks the coordinates allowed to accelerate
    (e.g. a welded root); the rest get qddot = 0.
    """
    bias = inverse_dynamics(tree, q, qdot, np.zeros(tree.dof), gravity)
    M = mass_matrix(tree, q)
    rhs = np.asarray(tau, dtype=float) - bias
    if free_dofs is None:
        return np.linalg.solve(M, rhs)
    mask = np.asarray(free_dofs, dtype=bool)
    out = np.zeros(tree.dof)
    out[mask] = np.linalg.solve(M[np.ix_(mask, mask)], rhs[mask])
    return out
