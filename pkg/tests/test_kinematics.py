import numpy as np
import pytest

from handpipe.kinematics import (HandPose, ModelError, builtin_model,
                                 forward_kinematics, hand_joints_3d, hand_q,
                                 load_model, point_jacobian, shape_scales)
from handpipe.kinematics.fk import fk_full
from handpipe.so3 import exp_so3
from handpipe.transforms import RigidTransform

CHAIN_TMPL = """
name: chain
links:
{links}
joints:
{joints}
"""


def chain_model(n, axis=(0, 0, 1), length=1.0):
    """n revolute joints about `axis`, unit links along +x."""
    links = "\n".join(f"  - {{name: l{i}, mass: 0.1, com: [0.5, 0, 0], "
                      f"inertia: [1.0e-4, 1.0e-4, 1.0e-4]}}" for i in range(n + 1))
    joints = ["  - {name: root, kind: free, parent: world, child: l0, "
              "limits: [[-10, 10], [-10, 10], [-10, 10], [-3.2, 3.2], [-3.2, 3.2], [-3.2, 3.2]]}"]
    for i in range(n):
        joints.append(
            f"  - {{name: j{i}, kind: revolute, parent: l{i}, child: l{i + 1}, "
            f"axis: [{axis[0]}, {axis[1]}, {axis[2]}], "
            f"origin: {{xyz: [{length if i > 0 else 0.0}, 0, 0]}}, limits: [-6.0, 6.0]}}")
    return load_model(CHAIN_TMPL.format(links=links, joints="\n".join(joints)))


def fd_point_jacobian(tree, q, link, point, h=1e-6):
    J = np.zeros((3, tree.dof))
    for k in range(tree.dof):
        qp, qm = q.copy(), q.copy()
        qp[k] += h
        qm[k] -= h
        fp = fk_full(tree, qp)
        fm = fk_full(tree, qm)
        pp = fp.positions[link] + fp.rotations[link] @ point
        pm = fm.positions[link] + fm.rotations[link] @ point
        J[:, k] = (pp - pm) / (2 * h)
    return J


class TestLoadModel:
    def test_builtin_robot_dof(self):
        assert builtin_model("robot_hand_30dof").dof == 30

    def test_builtin_human_dof(self):
        assert builtin_model("human_hand").dof == 51

    def test_cycle_detected(self):
        doc = """
name: bad
links:
  - {name: a, mass: 0.1, inertia: [1e-5, 1e-5, 1e-5]}
  - {name: b, mass: 0.1, inertia: [1e-5, 1e-5, 1e-5]}
  - {name: c, mass: 0.1, inertia: [1e-5, 1e-5, 1e-5]}
joints:
  - {name: root, kind: free, parent: world, child: a, limits: [[-1,1],[-1,1],[-1,1],[-1,1],[-1,1],[-1,1]]}
  - {name: j1, kind: revolute, parent: c, child: b, axis: [0,0,1], limits: [-1, 1]}
  - {name: j2, kind: revolute, parent: b, child: c, axis: [0,0,1], limits: [-1, 1]}
"""
        with pytest.raises(ModelError, match="cycle"):
            load_model(doc)

    def test_duplicate_names(self):
        doc = """
name: bad
links:
  - {name: a, mass: 0.1, inertia: [1e-5, 1e-5, 1e-5]}
  - {name: a, mass: 0.1, inertia: [1e-5, 1e-5, 1e-5]}
joints:
  - {name: root, kind: free, parent: world, child: a, limits: [[-1,1],[-1,1],[-1,1],[-1,1],[-1,1],[-1,1]]}
"""
        with pytest.raises(ModelError, match="duplicate"):
            load_model(doc)

    def test_non_unit_axis(self):
        doc = """
name: bad
links:
  - {name: a, mass: 0.1, inertia: [1e-5, 1e-5, 1e-5]}
  - {name: b, mass: 0.1, inertia: [1e-5, 1e-5, 1e-5]}
joints:
  - {name: root, kind: free, parent: world, child: a, limits: [[-1,1],[-1,1],[-1,1],[-1,1],[-1,1],[-1,1]]}
  - {name: j, kind: revolute, parent: a, child: b, axis: [0, 0, 2], limits: [-1, 1]}
"""
        with pytest.raises(ModelError, match="non-unit axis"):
            load_model(doc)

    def test_dof_accounting(self):
        for name in ("human_hand", "robot_hand_30dof"):
            tree = builtin_model(name)
            per_kind = {"revolute": 1, "ball": 3, "free": 6}
            assert tree.dof == sum(per_kind[j.kind] for j in tree.joints)

    def test_document_order_preserved(self):
        tree = builtin_model("robot_hand_30dof")
        assert tree.joints[0].name == "root"
        assert tree.joints[1].name == "wrj1"
        assert tree.links[0].name == "base"


class TestForwardKinematics:
    def test_two_link_rest(self):
        tree = chain_model(2)
        _, ps = forward_kinematics(tree, np.zeros(tree.dof))
        np.testing.assert_allclose(ps[-1], [1.0, 0.0, 0.0], atol=1e-15)
        # tip of second link is at its origin + 1 along x; add a third joint to
        # see the full 2-unit reach
        tree3 = chain_model(3)
        _, ps3 = forward_kinematics(tree3, np.zeros(tree3.dof))
        np.testing.assert_allclose(ps3[-1], [2.0, 0.0, 0.0], atol=1e-15)

    def test_quarter_turn(self):
        tree = chain_model(2)
        q = np.zeros(tree.dof)
        q[6] = np.pi / 2  # first revolute after the free root
        _, ps = forward_kinematics(tree, q)
        # tip link origin sits one unit along the rotated x axis
        np.testing.assert_allclose(ps[-1], [0.0, 1.0, 0.0], atol=1e-12)

    def test_matches_homogeneous_oracle(self):
        # independent oracle: explicit 4x4 composition for a 5-joint z-chain
        tree = chain_model(5)
        rng = np.random.default_rng(3)
        q = np.zeros(tree.dof)
        angles = rng.uniform(-1.5, 1.5, size=5)
        q[6:] = angles

        def homog(R, t):
            T = np.eye(4)
            T[:3, :3] = R
            T[:3, 3] = t
            return T

        T = np.eye(4)
        for i, a in enumerate(angles):
            Rz = np.array([[np.cos(a), -np.sin(a), 0],
                           [np.sin(a), np.cos(a), 0],
                           [0, 0, 1.0]])
            off = np.array([1.0 if i > 0 else 0.0, 0.0, 0.0])
            T = T @ homog(np.eye(3), off) @ homog(Rz, np.zeros(3))
        Rs, ps = forward_kinematics(tree, q)
        np.testing.assert_allclose(ps[-1], T[:3, 3], atol=1e-10)
        np.testing.assert_allclose(Rs[-1], T[:3, :3], atol=1e-10)

    def test_determinism_bit_identical(self):
        tree = builtin_model("robot_hand_30dof")
        q = np.random.default_rng(0).uniform(0.0, 0.2, size=30)
        Rs1, ps1 = forward_kinematics(tree, q)
        Rs2, ps2 = forward_kinematics(tree, q)
        assert np.array_equal(Rs1, Rs2) and np.array_equal(ps1, ps2)

    def test_rotations_orthonormal(self):
        tree = builtin_model("human_hand")
        rng = np.random.default_rng(7)
        q = np.zeros(51)
        q[3:6] = rng.normal(size=3)
        q[6:] = rng.uniform(-0.4, 0.4, size=45)
        Rs, _ = forward_kinematics(tree, q)
        for R in Rs:
            np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-9)

    def test_dimension_mismatch(self):
        tree = chain_model(2)
        with pytest.raises(ValueError):
            forward_kinematics(tree, np.zeros(3))

    def test_limit_violation_warns(self):
        tree = chain_model(1)
        q = np.zeros(tree.dof)
        q[-1] = 100.0
        with pytest.warns(UserWarning):
            forward_kinematics(tree, q)


class TestHandJoints:
    def test_rest_pose_table(self):
        tree = builtin_model("human_hand")
        J = hand_joints_3d(tree, HandPose.rest())
        assert J.shape == (21, 3)
        np.testing.assert_allclose(J[0], [0, 0, 0], atol=1e-15)
        # index mcp (row 5) equals the document base offset
        np.testing.assert_allclose(J[5], [0.092, 0.028, 0.0], atol=1e-12)
        # index chain is straight: pip = mcp + L1 * dir
        d = J[6] - J[5]
        np.testing.assert_allclose(np.linalg.norm(d), 0.042, atol=1e-12)

    def test_beta_doubles_distances(self):
        tree = builtin_model("human_hand")
        rest = hand_joints_3d(tree, HandPose.rest())
        big = hand_joints_3d(tree, HandPose(np.zeros(45), np.full(10, 1.99),
                                            RigidTransform.identity()))
        r1 = np.linalg.norm(rest[1:] - rest[0], axis=1)
        r2 = np.linalg.norm(big[1:] - big[0], axis=1)
        np.testing.assert_allclose(r2, 1.99 * r1, rtol=1e-12)

    def test_matches_fk_oracle(self):
        tree = builtin_model("human_hand")
        rng = np.random.default_rng(11)
        pose = HandPose(rng.uniform(-0.3, 0.3, size=45),
                        rng.uniform(0.8, 1.2, size=10),
                        RigidTransform.from_rotvec(rng.normal(size=3) * 0.3,
                                                   rng.normal(size=3) * 0.1))
        J = hand_joints_3d(tree, pose)
        js, ss = shape_scales(tree, pose.beta)
        fk = fk_full(tree, hand_q(tree, pose), origin_scale=js)
        for i, name in enumerate(tree.meta["landmark_sites"]):
            s = tree.site(name)
            off = s.offset * ss[tree.site_index[name]]
            expect = fk.positions[s.link] + fk.rotations[s.link] @ off
            np.testing.assert_allclose(J[i], expect, atol=1e-14)

    def test_beta_bounds_enforced(self):
        with pytest.raises(ValueError):
            HandPose(np.zeros(45), np.full(10, 2.5), RigidTransform.identity())


class TestPointJacobian:
    def test_single_revolute_column(self):
        tree = chain_model(1)
        q = np.zeros(tree.dof)
        J = point_jacobian(tree, q, tree.link_index("l1"), [1.0, 0.0, 0.0])
        np.testing.assert_allclose(J[:, 6], [0.0, 1.0, 0.0], atol=1e-14)

    def test_off_path_columns_zero(self):
        tree = builtin_model("robot_hand_30dof")
        q = np.zeros(30)
        link = tree.link_index("index_dist")
        J = point_jacobian(tree, q, link, [0.01, 0, 0])
        # thumb joints are not ancestors of the index fingertip
        for name in ("thj4", "thj3", "thj2", "thj1", "thj0"):
            ji = tree.joint_index(name)
            col = tree.q_slices[ji].start
            np.testing.assert_array_equal(J[:, col], np.zeros(3))

    @pytest.mark.parametrize("model", ["human_hand", "robot_hand_30dof"])
    def test_matches_finite_differences(self, model):
        tree = builtin_model(model)
        rng = np.random.default_rng(5)
        q = np.zeros(tree.dof)
        q[0:3] = rng.normal(size=3) * 0.1
        q[3:6] = rng.normal(size=3) * 0.5
        q[6:] = rng.uniform(-0.3, 0.3, size=tree.dof - 6)
        link = len(tree.links) - 1
        point = np.array([0.01, 0.002, -0.001])
        J = point_jacobian(tree, q, link, point)
        J_fd = fd_point_jacobian(tree, q, link, point)
        assert np.max(np.abs(J - J_fd)) < 1e-5

    def test_dimension_mismatch(self):
        tree = chain_model(1)
        with pytest.raises(ValueError):
            point_jacobian(tree, np.zeros(2), 0, [0, 0, 0])
