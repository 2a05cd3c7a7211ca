import numpy as np
import pytest

from handpipe.kinematics import (HandPose, builtin_model, hand_joints_3d,
                                 point_jacobian)
from handpipe.posefit import ObjectPose, PoseSequence
from handpipe.retarget import (init_linear_map, retarget_frame,
                               retarget_sequence, retarget_tsv_sequence,
                               tsv_human, tsv_robot)
from handpipe.transforms import RigidTransform

HUMAN = builtin_model("human_hand")
ROBOT = builtin_model("robot_hand_30dof")


def rest_pose():
    return HandPose.rest()


def smooth_robot_q(n_frames, amp=0.4, root=None):
    """A smooth in-limit robot joint trajectory that keeps the fingers
    flexed; straight fingers make proximal/distal flexion splits
    unobservable from task-space vectors."""
    lim = ROBOT.joint_limits()
    phase = np.linspace(0, np.pi, 24)
    base = 0.25 * lim[6:, 1]
    swing = amp * (lim[6:, 1] - base) * np.abs(np.sin(phase + 0.5))
    qs = []
    for t in range(n_frames):
        s = 0.5 * (1 - np.cos(2 * np.pi * t / max(n_frames - 1, 1)))
        q = np.zeros(30)
        if root is not None:
            q[0:6] = root
        q[6:] = np.clip(base + swing * s, lim[6:, 0] + 1e-6, lim[6:, 1] - 1e-6)
        qs.append(q)
    return qs


class TestTsv:
    def test_human_rest_matches_bone_chain(self):
        vecs = tsv_human(HUMAN, rest_pose()).vectors
        joints = hand_joints_3d(HUMAN, rest_pose())
        for f in range(5):
            np.testing.assert_allclose(vecs[2 * f], joints[2 + 4 * f] - joints[0],
                                       atol=1e-12)
            np.testing.assert_allclose(vecs[2 * f + 1],
                                       joints[4 + 4 * f] - joints[2 + 4 * f],
                                       atol=1e-12)

    def test_human_root_invariance(self):
        rng = np.random.default_rng(0)
        pose = rest_pose()
        pose.theta = rng.uniform(-0.2, 0.6, size=45).clip(-0.39, 1.0)
        a = tsv_human(HUMAN, pose).vectors
        moved = pose.copy()
        moved.root = RigidTransform.from_rotvec(rng.normal(size=3),
                                                rng.normal(size=3) * 0.3)
        b = tsv_human(HUMAN, moved).vectors
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_robot_rest(self):
        vecs = tsv_robot(ROBOT, np.zeros(30)).vectors
        assert vecs.shape == (10, 3)
        # index wrist->proximal at rest: base offset + prox length along the
        # yawed direction
        from handpipe.so3 import exp_so3
        d = exp_so3([0, 0, 0.06]) @ np.array([0.045, 0.0, 0.0])
        np.testing.assert_allclose(vecs[2], np.array([0.098, 0.030, 0.0]) + d,
                                   atol=1e-12)

    def test_robot_root_translation_invariance(self):
        q = np.zeros(30)
        q[6:] = 0.2
        a = tsv_robot(ROBOT, q).vectors
        q2 = q.copy()
        q2[0:3] = [0.3, -0.2, 0.4]
        b = tsv_robot(ROBOT, q2).vectors
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_robot_matches_fk_difference_oracle(self):
        rng = np.random.default_rng(1)
        lim = ROBOT.joint_limits()
        q = rng.uniform(lim[:, 0], lim[:, 1])
        q[0:6] = [0.1, -0.05, 0.2, 0.3, -0.2, 0.1]
        vecs = tsv_robot(ROBOT, q).vectors
        from handpipe.kinematics.fk import fk_full, site_positions
        fk = fk_full(ROBOT, q)
        names = ["wrist"] + [f"{f}_proximal" for f in
                             ("thumb", "index", "middle", "ring", "pinky")] + \
                [f"{f}_tip" for f in ("thumb", "index", "middle", "ring", "pinky")]
        pos = site_positions(ROBOT, fk, names)
        rt = fk.rotations[ROBOT.root].T
        for f in range(5):
            np.testing.assert_allclose(vecs[2 * f], rt @ (pos[1 + f] - pos[0]),
                                       atol=1e-10)
            np.testing.assert_allclose(vecs[2 * f + 1],
                                       rt @ (pos[6 + f] - pos[1 + f]), atol=1e-10)


class TestLinearMap:
    def test_zero_theta_gives_zero_fingers(self):
        pose = rest_pose()
        pose.root = RigidTransform(np.eye(3), np.array([0.1, 0.0, 0.2]))
        q0 = init_linear_map(ROBOT, pose)
        np.testing.assert_array_equal(q0[6:], np.zeros(24))
        np.testing.assert_allclose(q0[0:3], [0.1, 0.0, 0.2], atol=1e-12)

    def test_uniform_index_block(self):
        pose = rest_pose()
        theta = np.zeros(45)
        theta[9:18] = 0.5     # the whole index-finger block
        pose.theta = theta
        q0 = init_linear_map(ROBOT, pose)
        for name in ("ffj3", "ffj2", "ffj1", "ffj0"):
            ji = ROBOT.joint_index(name)
            val = q0[ROBOT.q_slices[ji].start]
            # ffj3 limit is [-0.35, 0.35] so it clamps; others receive 0.5
            if name == "ffj3":
                assert val == pytest.approx(0.35)
            else:
                assert val == pytest.approx(0.5)

    def test_always_within_limits(self):
        rng = np.random.default_rng(3)
        lim = ROBOT.joint_limits()
        for _ in range(10):
            pose = rest_pose()
            pose.theta = rng.uniform(-1.8, 1.8, size=45).clip(-0.69, 1.89)
            pose.root = RigidTransform.from_rotvec(rng.normal(size=3) * 0.4,
                                                   rng.normal(size=3))
            q0 = init_linear_map(ROBOT, pose)
            assert np.all(q0 >= lim[:, 0] - 1e-12)
            assert np.all(q0 <= lim[:, 1] + 1e-12)


class TestRetargetFrame:
    def test_self_consistency_alpha_zero(self):
        qstar = smooth_robot_q(3)[1]
        target = tsv_robot(ROBOT, qstar)
        q_init = qstar + np.random.default_rng(0).normal(0, 0.02, size=30)
        lim = ROBOT.joint_limits()
        q_init = np.clip(q_init, lim[:, 0], lim[:, 1])
        q, _ = retarget_frame(ROBOT, target, q_last=np.zeros(30), alpha=0.0,
                              q_init=q_init)
        d = tsv_robot(ROBOT, q).vectors - target.vectors
        assert np.sum(d * d) < 1e-6

    def test_huge_alpha_pins_to_qlast(self):
        # penalty-dominated limit; with millimeter vector residuals the
        # regularizer needs ~1e8 to dominate every joint's data term
        q_last = smooth_robot_q(3)[1]
        qstar = q_last.copy()
        qstar[6:] = np.clip(q_last[6:] + 0.2, None, ROBOT.joint_limits()[6:, 1])
        target = tsv_robot(ROBOT, qstar)
        q, _ = retarget_frame(ROBOT, target, q_last=q_last, alpha=1e8,
                              q_init=q_last)
        assert np.max(np.abs(q - q_last)) < 1e-3

    def test_descent_from_init(self):
        from handpipe.retarget import tsv_residual
        rng = np.random.default_rng(5)
        qstar = smooth_robot_q(3)[1]
        target = tsv_robot(ROBOT, qstar)
        lim = ROBOT.joint_limits()
        q_init = np.clip(qstar + rng.normal(0, 0.15, 30), lim[:, 0], lim[:, 1])
        q_last = q_init.copy()
        alpha = 8e-3

        def objective(qv):
            return tsv_residual(ROBOT, qv, target) / 0.001**2 \
                + alpha * np.sum((qv - q_last) ** 2)

        q, _ = retarget_frame(ROBOT, target, q_last, alpha, q_init)
        assert objective(q) <= objective(q_init) + 1e-12

    def test_limits_respected(self):
        rng = np.random.default_rng(8)
        lim = ROBOT.joint_limits()
        target = tsv_robot(ROBOT, smooth_robot_q(3, amp=0.9)[2])
        q_init = np.clip(rng.normal(0, 0.3, 30), lim[:, 0], lim[:, 1])
        q, _ = retarget_frame(ROBOT, target, np.zeros(30), 8e-3, q_init)
        assert np.all(q >= lim[:, 0] - 1e-12)
        assert np.all(q <= lim[:, 1] + 1e-12)

    def test_alpha_monotonicity(self):
        qstar = smooth_robot_q(5, amp=0.6)[3]
        target = tsv_robot(ROBOT, qstar)
        q_last = smooth_robot_q(5, amp=0.6)[2]
        dists = []
        for alpha in (0.0, 1e-3, 1e-1, 10.0, 1e3):
            q, _ = retarget_frame(ROBOT, target, q_last, alpha, q_last)
            dists.append(np.linalg.norm(q - q_last))
        for a, b in zip(dists, dists[1:]):
            assert b <= a + 1e-9


class TestRetargetSequence:
    def test_constant_input_constant_output(self):
        # the zero-vector pull on frame 0 decays geometrically through the
        # sequence; the output settles to machine-level constancy
        pose = rest_pose()
        pose.theta[10] = 0.6    # something nontrivial
        frames = [(i / 25.0, pose.copy(), ObjectPose(np.eye(3), np.zeros(3)))
                  for i in range(8)]
        seq = PoseSequence(frames, 25.0)
        traj = retarget_sequence(seq, HUMAN, ROBOT)
        Q = traj.joint_matrix()
        diffs = [np.max(np.abs(Q[t] - Q[t - 1])) for t in range(2, len(Q))]
        assert diffs == sorted(diffs, reverse=True)
        assert diffs[-1] < 1e-8

    def test_roundtrip_recovery(self):
        root = np.array([0.05, -0.1, 0.25, 0.2, -0.1, 0.3])
        qs = smooth_robot_q(40, amp=0.5, root=root)
        targets = [tsv_robot(ROBOT, q) for q in qs]
        rec = retarget_tsv_sequence(ROBOT, targets, alpha=8e-3,
                                    roots=[q[0:6] for q in qs],
                                    q_init0=qs[0])
        err = max(np.max(np.abs(r - q)) for r, q in zip(rec, qs))
        assert err < 1e-3

    def test_regularizer_bounds_jumps(self):
        # noisy targets excite weakly-observed joint directions; the
        # temporal term must keep jumps at or below the unregularized run's
        from handpipe.retarget import TaskSpaceVectors
        rng = np.random.default_rng(12)
        qs = smooth_robot_q(25, amp=0.5)
        targets = [TaskSpaceVectors(tsv_robot(ROBOT, q).vectors
                                    + rng.normal(0, 5e-4, (10, 3)))
                   for q in qs]
        out_reg = retarget_tsv_sequence(ROBOT, targets, alpha=8e-3,
                                        q_init0=qs[0])
        out_free = retarget_tsv_sequence(ROBOT, targets, alpha=0.0,
                                         q_init0=qs[0])

        def max_jump(seq):
            Q = np.stack(seq)
            return np.max(np.linalg.norm(np.diff(Q, axis=0), axis=1))

        assert max_jump(out_reg) <= max_jump(out_free) + 1e-9

    def test_determinism(self):
        pose = rest_pose()
        frames = [(i / 25.0, pose.copy(), ObjectPose(np.eye(3), np.zeros(3)))
                  for i in range(3)]
        seq = PoseSequence(frames, 25.0)
        a = retarget_sequence(seq, HUMAN, ROBOT).joint_matrix()
        b = retarget_sequence(seq, HUMAN, ROBOT).joint_matrix()
        assert np.array_equal(a, b)

    def test_timestamps_copied(self):
        pose = rest_pose()
        frames = [(0.1 + i / 25.0, pose.copy(), ObjectPose(np.eye(3), np.zeros(3)))
                  for i in range(3)]
        seq = PoseSequence(frames, 25.0)
        traj = retarget_sequence(seq, HUMAN, ROBOT)
        np.testing.assert_allclose(traj.timestamps(), seq.timestamps(), atol=1e-12)
