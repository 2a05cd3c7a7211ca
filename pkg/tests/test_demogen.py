import numpy as np
import pytest

from handpipe.demogen import (Demonstration, ServoParams, align_timesteps,
                              butterworth_gain, denormalize_action,
                              fit_minjerk, forward_dynamics, inverse_dynamics,
                              load_demonstration, lowpass, mass_matrix,
                              save_demonstration, servo_torque, so3_lowpass,
                              torque_to_action)
from handpipe.kinematics import builtin_model, load_model
from handpipe.retarget import RobotJointTrajectory
from handpipe.so3 import exp_so3, log_so3

ROBOT = builtin_model("robot_hand_30dof")

PENDULUM = """
name: pendulum
links:
  - {name: base, mass: 0.0, inertia: [0, 0, 0]}
  - {name: bob, mass: 1.0, com: [0, 0, -1.0], inertia: [0, 0, 0]}
joints:
  - {name: root, kind: free, parent: world, child: base, limits: [[-1,1],[-1,1],[-1,1],[-3.2,3.2],[-3.2,3.2],[-3.2,3.2]]}
  - {name: hinge, kind: revolute, parent: base, child: bob, axis: [0, 1.0, 0], limits: [-6.3, 6.3]}
"""

DOUBLE_PENDULUM = """
name: double_pendulum
links:
  - {name: base, mass: 0.0, inertia: [0, 0, 0]}
  - {name: l1, mass: 1.3, com: [0.8, 0, 0], inertia: [0, 0, 0]}
  - {name: l2, mass: 0.7, com: [0.5, 0, 0], inertia: [0, 0, 0]}
joints:
  - {name: root, kind: free, parent: world, child: base, limits: [[-1,1],[-1,1],[-1,1],[-3.2,3.2],[-3.2,3.2],[-3.2,3.2]]}
  - {name: j1, kind: revolute, parent: base, child: l1, axis: [0, 1.0, 0], limits: [-20, 20]}
  - {name: j2, kind: revolute, parent: l1, child: l2, axis: [0, 1.0, 0], origin: {xyz: [0.8, 0, 0]}, limits: [-20, 20]}
"""

G = 9.81


def dp_lagrangian(q1, q2, qd1, qd2, m1=1.3, m2=0.7, l1=0.8, l2=0.5):
    """Independent analytic Lagrangian of the planar double pendulum
    (rotations about +y, links along +x, gravity -z)."""
    # positions: R_y(a) @ (l, 0, 0) = (l cos a, 0, -l sin a)
    a1, a2 = q1, q1 + q2
    v1 = np.array([-l1 * np.sin(a1) * qd1, 0.0, -l1 * np.cos(a1) * qd1])
    p2dot = v1 + np.array([-l2 * np.sin(a2) * (qd1 + qd2), 0.0,
                           -l2 * np.cos(a2) * (qd1 + qd2)])
    T = 0.5 * m1 * v1 @ v1 + 0.5 * m2 * p2dot @ p2dot
    z1 = -l1 * np.sin(a1)
    z2 = z1 - l2 * np.sin(a2)
    V = G * (m1 * z1 + m2 * z2)
    return T - V


def dp_torque_oracle(q, qd, qdd, h=1e-5):
    """tau_i = d/dt dL/dqd_i - dL/dq_i by central differences of the
    analytic Lagrangian."""
    tau = np.zeros(2)
    for i in range(2):
        def dLdqd(qa, qda):
            e = np.zeros(2)
            e[i] = h
            return (dp_lagrangian(*qa, *(qda + e)) - dp_lagrangian(*qa, *(qda - e))) / (2 * h)

        dF = (dLdqd(q + h * qd, qd + h * qdd) - dLdqd(q - h * qd, qd - h * qdd)) / (2 * h)
        e = np.zeros(2)
        e[i] = h
        dLdq = (dp_lagrangian(*(q + e), *qd) - dp_lagrangian(*(q - e), *qd)) / (2 * h)
        tau[i] = dF - dLdq
    return tau


class TestLowpass:
    def test_constant_unchanged(self):
        x = np.full((200, 3), 7.25)
        np.testing.assert_allclose(lowpass(x), x, atol=1e-10)

    def test_40hz_attenuation_per_pass(self):
        t = np.arange(2000) / 100.0
        x = np.sin(2 * np.pi * 40.0 * t)
        y = lowpass(x, fs=100.0, fc=5.0)
        mid = slice(400, 1600)
        measured_two_pass = np.max(np.abs(y[mid]))
        per_pass = np.sqrt(measured_two_pass)
        analytic = 1.0 / np.sqrt(1.0 + (40.0 / 5.0) ** 4)
        assert abs(per_pass - analytic) / analytic < 0.10
        assert measured_two_pass == pytest.approx(analytic**2, rel=0.2)

    def test_low_frequency_passes(self):
        t = np.arange(3000) / 100.0
        x = np.sin(2 * np.pi * 0.5 * t)
        y = lowpass(x, fs=100.0, fc=5.0)
        assert np.max(np.abs(y[500:2500])) >= 0.99

    def test_linearity(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(150, 2))
        y = rng.normal(size=(150, 2))
        lhs = lowpass(2.5 * x + 0.3 * y)
        rhs = 2.5 * lowpass(x) + 0.3 * lowpass(y)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_nyquist_rejected(self):
        with pytest.raises(ValueError):
            lowpass(np.zeros(10), fs=100.0, fc=50.0)


class TestSo3Lowpass:
    def test_constant_unchanged(self):
        R = exp_so3([0.3, -0.2, 0.8])
        out = so3_lowpass([R] * 50)
        for Ro in out:
            np.testing.assert_allclose(Ro, R, atol=1e-9)

    def test_fixed_axis_reduces_to_scalar(self):
        axis = np.array([0.0, 0.0, 1.0])
        t = np.arange(120) / 100.0
        angles = 0.5 * np.sin(2 * np.pi * 2.0 * t) + 1.0
        out = so3_lowpass([exp_so3(axis * a) for a in angles])
        out_angles = np.array([log_so3(R)[2] for R in out])
        expected = lowpass(angles, 100.0, 5.0)
        np.testing.assert_allclose(out_angles, expected, atol=1e-9)

    def test_outputs_valid_rotations(self):
        rng = np.random.default_rng(1)
        Rs = [exp_so3(rng.normal(size=3) * 0.2 + [0.5, 0, 0]) for _ in range(30)]
        for R in so3_lowpass(Rs):
            np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-9)

    def test_near_pi_step_raises(self):
        Rs = [np.eye(3), exp_so3([np.pi - 0.01, 0, 0])]
        with pytest.raises(ValueError, match="frame 1"):
            so3_lowpass(Rs + [np.eye(3)] * 5)


class TestAlignTimesteps:
    def make_traj(self, K, fn):
        frames = [(i / 25.0, fn(i / 25.0)) for i in range(K)]
        return RobotJointTrajectory(frames, ROBOT)

    def test_frame_count(self):
        traj = self.make_traj(11, lambda t: np.zeros(30))
        assert len(align_timesteps(traj)) == 41

    def test_linear_reproduced_exactly(self):
        def fn(t):
            q = np.zeros(30)
            q[8] = 0.1 + 0.4 * t
            q[0] = -0.05 + 0.2 * t
            return q
        out = align_timesteps(self.make_traj(9, fn))
        for t, q in out.frames:
            np.testing.assert_allclose(q[8], 0.1 + 0.4 * t, atol=1e-12)
            np.testing.assert_allclose(q[0], -0.05 + 0.2 * t, atol=1e-12)

    def test_input_samples_reproduced(self):
        rng = np.random.default_rng(2)
        lim = ROBOT.joint_limits()
        qs = [np.clip(rng.normal(0, 0.1, 30), lim[:, 0] + 0.01, lim[:, 1] - 0.01)
              for _ in range(6)]
        traj = RobotJointTrajectory([(i / 25.0, q) for i, q in enumerate(qs)], ROBOT)
        out = align_timesteps(traj)
        Q = out.joint_matrix()
        for i, q in enumerate(qs):
            np.testing.assert_allclose(Q[4 * i], q, atol=1e-9)

    def test_constant_rate_rotation_geodesic(self):
        def fn(t):
            q = np.zeros(30)
            q[5] = 0.8 * t   # rotation about z at constant rate
            return q
        out = align_timesteps(self.make_traj(6, fn))
        for t, q in out.frames:
            np.testing.assert_allclose(q[3:6], [0, 0, 0.8 * t], atol=1e-9)

    def test_too_few_frames(self):
        with pytest.raises(ValueError):
            align_timesteps(self.make_traj(2, lambda t: np.zeros(30)))


class TestFitMinjerk:
    def test_stationary(self):
        ts = np.arange(50) / 100.0
        Y = np.full((50, 4), 0.3)
        sp = fit_minjerk(ts, Y)
        for t in (0.0, 0.21, 0.49):
            np.testing.assert_allclose(sp.velocity(t), 0, atol=1e-9)
            np.testing.assert_allclose(sp.acceleration(t), 0, atol=1e-9)

    def test_quadratic_acceleration(self):
        ts = np.arange(201) / 100.0
        y = ts**2
        sp = fit_minjerk(ts, y)
        interior = np.linspace(0.4, 1.6, 25)
        acc = np.array([sp.acceleration(t)[0] for t in interior])
        np.testing.assert_allclose(acc, 2.0, atol=1e-3)

    def test_boundary_velocities_zero(self):
        rng = np.random.default_rng(3)
        ts = np.arange(40) / 100.0
        Y = rng.normal(size=(40, 2)).cumsum(axis=0) * 0.01
        sp = fit_minjerk(ts, Y)
        np.testing.assert_allclose(sp.velocity(ts[0]), np.zeros(2), atol=1e-12)
        np.testing.assert_allclose(sp.velocity(ts[-1]), np.zeros(2), atol=1e-12)

    def test_c2_continuity_at_knots(self):
        # one-sided second-derivative limits from the piecewise coefficients
        ts = np.arange(60) / 100.0
        Y = 0.3 * np.sin(2 * np.pi * 1.5 * ts)[:, None]
        sp = fit_minjerk(ts, Y)
        c = sp.spline.c
        h = np.diff(ts)
        for k in range(len(ts) - 2):
            left = 6 * c[0, k, 0] * h[k] + 2 * c[1, k, 0]
            right = 2 * c[1, k + 1, 0]
            assert abs(left - right) < 1e-9

    def test_too_few_frames(self):
        with pytest.raises(ValueError):
            fit_minjerk(np.array([0.0, 0.01, 0.02]), np.zeros((3, 1)))


class TestInverseDynamics:
    def test_equilibrium_zero(self):
        tree = load_model(PENDULUM)
        z = np.zeros(7)
        tau = inverse_dynamics(tree, z, z, z, gravity=(0, 0, 0))
        np.testing.assert_array_equal(tau, np.zeros(7))

    def test_horizontal_pendulum_analytic(self):
        tree = load_model(PENDULUM)
        q = np.zeros(7)
        q[6] = np.pi / 2
        tau = inverse_dynamics(tree, q, np.zeros(7), np.zeros(7))
        assert abs(tau[6] - 9.81) < 1e-9

    def test_double_pendulum_vs_lagrangian_oracle(self):
        tree = load_model(DOUBLE_PENDULUM)
        rng = np.random.default_rng(5)
        for _ in range(10):
            q2, qd2, qdd2 = rng.normal(size=(3, 2))
            q = np.zeros(8)
            qd = np.zeros(8)
            qdd = np.zeros(8)
            q[6:] = q2
            qd[6:] = qd2
            qdd[6:] = qdd2
            tau = inverse_dynamics(tree, q, qd, qdd)[6:]
            oracle = dp_torque_oracle(q2, qd2, qdd2)
            denom = np.maximum(np.abs(oracle), 1.0)
            assert np.max(np.abs(tau - oracle) / denom) < 1e-4

    def test_conservative_trajectory_energy(self):
        tree = load_model(DOUBLE_PENDULUM)
        q = np.zeros(8)
        qd = np.zeros(8)
        q[6:] = [0.9, 0.4]

        free = np.zeros(8, dtype=bool)
        free[6:] = True   # fixed-base pendulum: the root is welded

        def deriv(q_, qd_):
            qdd_ = forward_dynamics(tree, q_, qd_, np.zeros(8), free_dofs=free)
            return qd_, qdd_

        dt = 1e-3
        qs, qds = [q.copy()], [qd.copy()]
        for _ in range(250):
            k1 = deriv(q, qd)
            k2 = deriv(q + dt / 2 * k1[0], qd + dt / 2 * k1[1])
            k3 = deriv(q + dt / 2 * k2[0], qd + dt / 2 * k2[1])
            k4 = deriv(q + dt * k3[0], qd + dt * k3[1])
            q = q + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            qd = qd + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            qs.append(q.copy())
            qds.append(qd.copy())

        # energy from the independent Lagrangian pieces: L(q,0) = -V
        def energy(q_, qd_):
            T_minus_V = dp_lagrangian(q_[6], q_[7], qd_[6], qd_[7])
            V = -dp_lagrangian(q_[6], q_[7], 0.0, 0.0)
            return T_minus_V + 2 * V

        e0 = energy(qs[0], qds[0])
        drift = max(abs(energy(a, b) - e0) for a, b in zip(qs, qds))
        assert drift < 1e-6
        # inverse dynamics along the free trajectory returns ~zero torque
        taus = []
        for i in range(1, len(qs) - 1):
            qdd_fd = (qds[i + 1] - qds[i - 1]) / (2 * dt)
            taus.append(np.abs(inverse_dynamics(tree, qs[i], qds[i], qdd_fd)[6:]).mean())
        assert np.mean(taus) < 1e-3

    def test_dimension_mismatch(self):
        tree = load_model(PENDULUM)
        with pytest.raises(ValueError):
            inverse_dynamics(tree, np.zeros(3), np.zeros(7), np.zeros(7))


class TestTorqueToAction:
    def setup_method(self):
        self.servo = ServoParams.from_tree(ROBOT)

    def test_zero_torque_is_position_hold(self):
        q = np.zeros(30)
        a, nclip = torque_to_action(np.zeros(30), q, self.servo)
        assert nclip == 0
        np.testing.assert_allclose(denormalize_action(a, self.servo), q, atol=1e-12)

    def test_saturation_flags(self):
        q = np.zeros(30)
        tau = np.zeros(30)
        tau[7] = 1e7
        a, nclip = torque_to_action(tau, q, self.servo)
        assert a[7] == 1.0
        assert nclip == 1

    def test_roundtrip_exact_when_unclipped(self):
        rng = np.random.default_rng(6)
        lim = ROBOT.joint_limits()
        q = np.clip(rng.normal(0, 0.1, 30), lim[:, 0] + 0.05, lim[:, 1] - 0.05)
        tau = rng.normal(0, 5.0, 30)
        a, nclip = torque_to_action(tau, q, self.servo)
        assert nclip == 0
        target = denormalize_action(a, self.servo)
        np.testing.assert_allclose(servo_torque(q, target, self.servo), tau,
                                   atol=1e-9)


class TestDemoIO:
    def test_roundtrip_and_bytes(self, tmp_path):
        rng = np.random.default_rng(7)
        states = rng.normal(size=(12, 39))
        actions = rng.uniform(-1, 1, size=(11, 30))
        demo = Demonstration(states, actions, "relocate", "mug",
                             np.array([0.1, 0.2, 0.15]))
        p1 = tmp_path / "a.demo"
        p2 = tmp_path / "b.demo"
        save_demonstration(str(p1), demo)
        save_demonstration(str(p2), demo)
        assert p1.read_bytes() == p2.read_bytes()
        back = load_demonstration(str(p1))
        np.testing.assert_allclose(back.states, states, atol=1e-15)
        np.testing.assert_allclose(back.actions, actions, atol=1e-15)
        assert back.task == "relocate" and back.object_id == "mug"
        np.testing.assert_allclose(back.target, [0.1, 0.2, 0.15], atol=1e-15)

    def test_action_length_contract(self):
        with pytest.raises(ValueError):
            Demonstration(np.zeros((5, 39)), np.zeros((5, 30)), "relocate", "mug")

    def test_action_range_contract(self):
        bad = np.zeros((4, 30))
        bad[0, 0] = 1.5
        with pytest.raises(ValueError):
            Demonstration(np.zeros((5, 39)), bad, "relocate", "mug")
