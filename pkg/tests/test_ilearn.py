import numpy as np
import pytest

from handpipe.demogen import Demonstration
from handpipe.ilearn import (Discriminator, GaussianMlpPolicy, InverseModel,
                             TrainConfig, Trajectory, ValueMlp,
                             collect_rollouts, dapg_gradient, evaluate,
                             format_mean_std, gae_advantages,
                             gail_plus_reward, gail_update, parse_mean_std,
                             rng_for, seed_for, soil_fill_demos, soil_update,
                             surrogate, train, trpo_update)
from handpipe.simenv import EnvConfig, make_env


def tiny_policy(obs_dim=5, act_dim=3, seed=0):
    return GaussianMlpPolicy(obs_dim, act_dim, hidden=(8, 8),
                             rng=np.random.default_rng(seed))


def env_factory_for(cfg):
    return lambda batch: make_env(cfg, batch)


class TestSeeding:
    def test_deterministic_and_distinct(self):
        assert seed_for(7, "rollout", 3) == seed_for(7, "rollout", 3)
        assert seed_for(7, "rollout", 3) != seed_for(7, "rollout", 4)
        assert seed_for(7, "rollout", 3) != seed_for(8, "rollout", 3)


class TestGradientChecks:
    def test_policy_logprob_gradient(self):
        rng = np.random.default_rng(1)
        pol = tiny_policy()
        obs = rng.normal(size=(6, 5))
        act = rng.normal(size=(6, 3))
        w = rng.normal(size=6)
        g = pol.weighted_logprob_grad(obs, act, w)
        theta0 = pol.get_flat()
        h = 1e-6
        idx = rng.choice(len(theta0), size=25, replace=False)
        for k in idx:
            tp, tm = theta0.copy(), theta0.copy()
            tp[k] += h
            tm[k] -= h
            pol.set_flat(tp)
            fp = np.sum(w * pol.log_prob(obs, act))
            pol.set_flat(tm)
            fm = np.sum(w * pol.log_prob(obs, act))
            fd = (fp - fm) / (2 * h)
            denom = max(abs(fd), abs(g[k]), 1e-8)
            assert abs(g[k] - fd) / denom < 1e-4
        pol.set_flat(theta0)

    def test_value_gradient(self):
        rng = np.random.default_rng(2)
        val = ValueMlp(5, hidden=(8, 8), rng=np.random.default_rng(0))
        obs = rng.normal(size=(7, 5))
        tgt = rng.normal(size=7)
        _, g = val.loss_and_grad(obs, tgt)
        theta0 = val.net.get_flat()
        h = 1e-6
        for k in rng.choice(len(theta0), size=20, replace=False):
            tp, tm = theta0.copy(), theta0.copy()
            tp[k] += h
            tm[k] -= h
            val.net.set_flat(tp)
            fp = np.mean((val.value(obs) - tgt) ** 2)
            val.net.set_flat(tm)
            fm = np.mean((val.value(obs) - tgt) ** 2)
            fd = (fp - fm) / (2 * h)
            denom = max(abs(fd), abs(g[k]), 1e-8)
            assert abs(g[k] - fd) / denom < 1e-4
        val.net.set_flat(theta0)

    def test_discriminator_gradient(self):
        rng = np.random.default_rng(3)
        disc = Discriminator(4, 2, hidden=(8, 8), rng=np.random.default_rng(0))
        sp = rng.normal(size=(6, 6))
        sd = rng.normal(size=(5, 6))
        _, g = disc.loss_and_grad(sp, sd)
        theta0 = disc.net.get_flat()
        h = 1e-6
        for k in rng.choice(len(theta0), size=20, replace=False):
            tp, tm = theta0.copy(), theta0.copy()
            tp[k] += h
            tm[k] -= h
            disc.net.set_flat(tp)
            fp, _ = disc.loss_and_grad(sp, sd)
            disc.net.set_flat(tm)
            fm, _ = disc.loss_and_grad(sp, sd)
            fd = (fp - fm) / (2 * h)
            denom = max(abs(fd), abs(g[k]), 1e-8)
            assert abs(g[k] - fd) / denom < 1e-4
        disc.net.set_flat(theta0)

    def test_inverse_model_gradient(self):
        rng = np.random.default_rng(4)
        inv = InverseModel(4, 2, hidden=(8, 8), rng=np.random.default_rng(0))
        s = rng.normal(size=(6, 4))
        sn = rng.normal(size=(6, 4))
        a = rng.normal(size=(6, 2))
        _, g = inv.loss_and_grad(s, sn, a)
        theta0 = inv.net.get_flat()
        h = 1e-6
        for k in rng.choice(len(theta0), size=20, replace=False):
            tp, tm = theta0.copy(), theta0.copy()
            tp[k] += h
            tm[k] -= h
            inv.net.set_flat(tp)
            fp, _ = inv.loss_and_grad(s, sn, a)
            inv.net.set_flat(tm)
            fm, _ = inv.loss_and_grad(s, sn, a)
            fd = (fp - fm) / (2 * h)
            denom = max(abs(fd), abs(g[k]), 1e-8)
            assert abs(g[k] - fd) / denom < 1e-4
        inv.net.set_flat(theta0)

    def test_fvp_matches_kl_hessian(self):
        rng = np.random.default_rng(5)
        pol = GaussianMlpPolicy(3, 2, hidden=(4, 4),
                                rng=np.random.default_rng(1))
        obs = rng.normal(size=(5, 3))
        mu_old = pol.mean_net.forward(obs)[0].copy()
        ls_old = pol.log_std.copy()
        theta0 = pol.get_flat()
        n = len(theta0)
        h = 1e-5

        def kl_grad(theta):
            g = np.zeros(n)
            for k in range(n):
                tp, tm = theta.copy(), theta.copy()
                tp[k] += h
                tm[k] -= h
                pol.set_flat(tp)
                fp = pol.kl_from(obs, mu_old, ls_old)
                pol.set_flat(tm)
                fm = pol.kl_from(obs, mu_old, ls_old)
                g[k] = (fp - fm) / (2 * h)
            return g

        v = rng.normal(size=n)
        hv_fd = (kl_grad(theta0 + h * v) - kl_grad(theta0 - h * v)) / (2 * h)
        pol.set_flat(theta0)
        hv = pol.fisher_vector_product(obs, v, damping=0.0)
        denom = max(np.max(np.abs(hv_fd)), 1e-6)
        assert np.max(np.abs(hv - hv_fd)) / denom < 1e-3

    def test_gaussian_normalization(self):
        pol = tiny_policy()
        obs = np.random.default_rng(0).normal(size=(3, 5))
        mu = pol.mean_net.forward(obs)[0]
        logp = pol.log_prob(obs, mu)
        expect = -0.5 * np.sum(np.log(2 * np.pi * np.exp(2 * pol.log_std)))
        np.testing.assert_allclose(logp, expect, atol=1e-12)


class TestGae:
    def make_traj(self, rewards):
        T = len(rewards)
        return Trajectory(np.zeros((T, 2)), np.zeros((T, 1)),
                          np.asarray(rewards, dtype=float), np.zeros(T))

    def test_zero_rewards_zero_value(self):
        trajs = [self.make_traj(np.zeros(10))]
        adv, _ = gae_advantages(trajs, lambda o: np.zeros(len(o)),
                                normalize=False)
        np.testing.assert_array_equal(adv, np.zeros(10))

    def test_lambda_zero_is_td_error(self):
        rng = np.random.default_rng(6)
        rewards = rng.normal(size=8)
        values = rng.normal(size=8)
        trajs = [self.make_traj(rewards)]
        gamma = 0.9
        adv, _ = gae_advantages(trajs, lambda o: values, gamma=gamma, lam=0.0,
                                normalize=False)
        for t in range(8):
            v_next = values[t + 1] if t < 7 else 0.0
            nonterm = 0.0 if t == 7 else 1.0
            expect = rewards[t] + gamma * v_next * nonterm - values[t]
            assert adv[t] == pytest.approx(expect, abs=1e-12)

    def test_reward_to_go_suffix_sums(self):
        rng = np.random.default_rng(7)
        rewards = rng.normal(size=9)
        trajs = [self.make_traj(rewards)]
        adv, _ = gae_advantages(trajs, lambda o: np.zeros(len(o)), gamma=1.0,
                                lam=1.0, normalize=False)
        suffix = np.cumsum(rewards[::-1])[::-1]
        np.testing.assert_allclose(adv, suffix, atol=1e-12)


class TestTrpo:
    def make_batch(self, pol, n=64, seed=0):
        rng = np.random.default_rng(seed)
        obs = rng.normal(size=(n, pol.obs_dim))
        act = rng.normal(size=(n, pol.act_dim))
        adv = rng.normal(size=n)
        logp = pol.log_prob(obs, act)
        return obs, act, adv, logp

    def test_accepted_step_kl_bound(self):
        pol = tiny_policy()
        obs, act, adv, logp = self.make_batch(pol)
        diag = trpo_update(pol, obs, act, adv, logp)
        assert diag.accepted
        assert diag.kl <= 0.01 + 1e-6
        assert diag.surrogate_improvement >= 0.0

    def test_linesearch_exhaustion_zero_step(self):
        pol = tiny_policy()
        obs, act, adv, logp = self.make_batch(pol)
        theta0 = pol.get_flat().copy()
        # an adversarial (negated) gradient cannot improve the surrogate
        g = -pol.weighted_logprob_grad(obs, act, adv)
        diag = trpo_update(pol, obs, act, adv, logp, gradient=g)
        assert not diag.accepted
        np.testing.assert_array_equal(pol.get_flat(), theta0)

    def test_gradient_matches_surrogate_fd(self):
        pol = tiny_policy()
        obs, act, adv, logp = self.make_batch(pol, n=16, seed=3)
        g = pol.weighted_logprob_grad(obs, act, adv)
        theta0 = pol.get_flat()
        h = 1e-6
        rng = np.random.default_rng(0)
        for k in rng.choice(len(theta0), size=20, replace=False):
            tp, tm = theta0.copy(), theta0.copy()
            tp[k] += h
            tm[k] -= h
            pol.set_flat(tp)
            fp = surrogate(pol, obs, act, adv, logp)
            pol.set_flat(tm)
            fm = surrogate(pol, obs, act, adv, logp)
            fd = (fp - fm) / (2 * h)
            denom = max(abs(fd), abs(g[k]), 1e-8)
            assert abs(g[k] - fd) / denom < 1e-4
        pol.set_flat(theta0)


class TestDapg:
    def test_lam0_zero_reduces_to_pg(self):
        pol = tiny_policy()
        rng = np.random.default_rng(8)
        obs = rng.normal(size=(20, 5))
        act = rng.normal(size=(20, 3))
        adv = rng.normal(size=20)
        d_obs = rng.normal(size=(15, 5))
        d_act = rng.normal(size=(15, 3))
        g0 = pol.weighted_logprob_grad(obs, act, adv)
        g = dapg_gradient(pol, obs, act, adv, d_obs, d_act, k=3, lam0=0.0,
                          lam1=0.95)
        np.testing.assert_array_equal(g, g0)

    def test_geometric_decay(self):
        pol = tiny_policy()
        rng = np.random.default_rng(9)
        obs = rng.normal(size=(20, 5))
        act = rng.normal(size=(20, 3))
        adv = np.abs(rng.normal(size=20)) + 0.1
        d_obs = rng.normal(size=(15, 5))
        d_act = rng.normal(size=(15, 3))
        g_pg = pol.weighted_logprob_grad(obs, act, adv)
        g0 = dapg_gradient(pol, obs, act, adv, d_obs, d_act, 0, 0.1, 0.95)
        g200 = dapg_gradient(pol, obs, act, adv, d_obs, d_act, 200, 0.1, 0.95)
        ratio = np.linalg.norm(g200 - g_pg) / np.linalg.norm(g0 - g_pg)
        assert ratio == pytest.approx(0.95**200, rel=1e-6)

    def test_demo_term_matches_bruteforce(self):
        pol = tiny_policy()
        rng = np.random.default_rng(10)
        obs = rng.normal(size=(12, 5))
        act = rng.normal(size=(12, 3))
        adv = rng.normal(size=12)
        d_obs = rng.normal(size=(6, 5))
        d_act = rng.normal(size=(6, 3))
        lam0, lam1, k = 0.2, 0.9, 4
        g = dapg_gradient(pol, obs, act, adv, d_obs, d_act, k, lam0, lam1)
        g_pg = pol.weighted_logprob_grad(obs, act, adv)
        scale = lam0 * lam1**k * np.max(adv)
        brute = np.zeros_like(g_pg)
        for i in range(6):
            brute += pol.weighted_logprob_grad(d_obs[i:i + 1], d_act[i:i + 1],
                                               np.array([scale]))
        np.testing.assert_allclose(g - g_pg, brute, atol=1e-10)

    def test_empty_demos_rejected(self):
        pol = tiny_policy()
        with pytest.raises(ValueError):
            dapg_gradient(pol, np.zeros((4, 5)), np.zeros((4, 3)),
                          np.zeros(4), None, None, 0, 0.1, 0.95)


class TestGail:
    def test_identical_batches_push_toward_half(self):
        rng = np.random.default_rng(11)
        disc = Discriminator(3, 2, hidden=(8, 8), rng=np.random.default_rng(2))
        sa = rng.normal(size=(40, 5))
        for _ in range(300):
            disc.update(sa, sa, lr=3e-3)
        p = disc.prob(sa[:, :3], sa[:, 3:])
        assert np.max(np.abs(p - 0.5)) < 0.05

    def test_separable_clouds_classified(self):
        rng = np.random.default_rng(12)
        disc = Discriminator(3, 2, hidden=(8, 8), rng=np.random.default_rng(3))
        pol_sa = rng.normal(size=(200, 5)) + 2.0
        demo_sa = rng.normal(size=(200, 5)) - 2.0
        for _ in range(200):
            disc.update(pol_sa, demo_sa, lr=1e-2)
        dp = disc.prob(pol_sa[:, :3], pol_sa[:, 3:])
        dd = disc.prob(demo_sa[:, :3], demo_sa[:, 3:])
        acc = 0.5 * (np.mean(dp > 0.5) + np.mean(dd < 0.5))
        assert acc > 0.95

    def test_loss_decreases_initially(self):
        rng = np.random.default_rng(13)
        disc = Discriminator(3, 2, hidden=(8, 8), rng=np.random.default_rng(4))
        pol_sa = rng.normal(size=(100, 5)) + 1.0
        demo_sa = rng.normal(size=(100, 5)) - 1.0
        losses = [disc.update(pol_sa, demo_sa, lr=1e-3) for _ in range(10)]
        assert losses[-1] < losses[0]

    def test_outputs_strictly_inside_unit_interval(self):
        disc = Discriminator(3, 2, hidden=(8, 8), rng=np.random.default_rng(5))
        x = np.random.default_rng(0).normal(size=(10, 5)) * 100
        p = disc.prob(x[:, :3], x[:, 3:])
        assert np.all(p > 0) and np.all(p < 1)

    def test_reward_shaping(self):
        r = np.array([1.0, -0.5])
        np.testing.assert_array_equal(gail_plus_reward(r, np.array([0.3, 0.7]), 0.0), r)
        shaped = gail_plus_reward(np.array([0.0]), np.array([0.5]), 2.0)
        assert shaped[0] == pytest.approx(2.0 * np.log(2.0))
        lo = gail_plus_reward(np.array([0.0]), np.array([0.9]), 1.0)
        hi = gail_plus_reward(np.array([0.0]), np.array([0.1]), 1.0)
        assert hi > lo


class TestSoil:
    def test_linear_dynamics_learned(self):
        rng = np.random.default_rng(14)
        inv = InverseModel(4, 4, hidden=(32, 32), rng=np.random.default_rng(6))
        s = rng.uniform(-1, 1, size=(4000, 4))
        a = rng.uniform(-0.5, 0.5, size=(4000, 4))
        s_next = s + a
        inv.fit(s[:3000], s_next[:3000], a[:3000], epochs=60, batch=128,
                lr=3e-3, rng=np.random.default_rng(7))
        pred = inv.predict(s[3000:], s_next[3000:])
        mse = np.mean(np.sum((pred - a[3000:]) ** 2, axis=1)) / 4
        assert mse < 1e-3

    def test_filled_actions_contract(self):
        inv = InverseModel(4, 4, hidden=(8, 8), rng=np.random.default_rng(8))
        states = [np.random.default_rng(0).normal(size=(9, 4)) * 10]
        obs, act = soil_fill_demos(inv, states)
        assert obs.shape == (8, 4)
        assert act.shape == (8, 4)
        assert np.all(np.abs(act) <= 1.0)

    def test_mse_decreases(self):
        rng = np.random.default_rng(15)
        inv = InverseModel(3, 2, hidden=(8, 8), rng=np.random.default_rng(9))
        s = rng.normal(size=(200, 3))
        a = rng.uniform(-1, 1, size=(200, 2))
        sn = s + 0.1
        losses = []
        from handpipe.ilearn import Adam
        opt = Adam(inv.net.n_params, lr=1e-3)
        for _ in range(10):
            loss, g = inv.loss_and_grad(s, sn, a)
            losses.append(loss)
            inv.net.set_flat(opt.step(inv.net.get_flat(), g))
        assert all(b <= a_ for a_, b in zip(losses, losses[1:]))

    def test_oracle_inverse_model_roundtrip(self):
        rng = np.random.default_rng(16)
        states = rng.normal(size=(12, 6))
        true_actions = rng.uniform(-1.4, 1.4, size=(11, 3))
        lookup = {i: true_actions[i] for i in range(11)}

        def oracle(s, s_next):
            out = np.zeros((len(s), 3))
            for i in range(len(s)):
                for j in range(11):
                    if np.array_equal(s[i], states[j]):
                        out[i] = lookup[j]
            return out

        obs, act = soil_fill_demos(oracle, [states])
        np.testing.assert_array_equal(act, np.clip(true_actions, -1, 1))

    def test_state_action_demos_rejected(self):
        from handpipe.ilearn import demos_to_arrays
        demo = Demonstration(np.zeros((5, 39)), np.zeros((4, 30)),
                             "relocate", "mug")
        with pytest.raises(ValueError, match="state-only"):
            demos_to_arrays([demo], require_actions=False)


class TestRolloutsAndTraining:
    def setup_method(self):
        self.cfg = EnvConfig(task="relocate", horizon=20)
        self.factory = env_factory_for(self.cfg)

    def test_rollout_counts(self):
        pol = GaussianMlpPolicy(39, 30, rng=np.random.default_rng(0))
        trajs, stats = collect_rollouts(pol, self.factory, 12, seed=3)
        assert len(trajs) == 12
        assert all(len(t) == 20 for t in trajs)

    def test_chunking_invariance(self):
        pol = GaussianMlpPolicy(39, 30, rng=np.random.default_rng(0))
        t1, _ = collect_rollouts(pol, self.factory, 10, seed=5, chunk=10)
        t2, _ = collect_rollouts(pol, self.factory, 10, seed=5, chunk=3)
        for a, b in zip(t1, t2):
            np.testing.assert_array_equal(a.obs, b.obs)
            np.testing.assert_array_equal(a.actions, b.actions)
            np.testing.assert_array_equal(a.rewards, b.rewards)
            np.testing.assert_array_equal(a.log_probs, b.log_probs)

    def test_deterministic_mode_repeatable(self):
        pol = GaussianMlpPolicy(39, 30, rng=np.random.default_rng(0))
        t1, _ = collect_rollouts(pol, self.factory, 4, seed=1, deterministic=True)
        t2, _ = collect_rollouts(pol, self.factory, 4, seed=1, deterministic=True)
        for a, b in zip(t1, t2):
            np.testing.assert_array_equal(a.actions, b.actions)

    def test_train_smoke_and_determinism(self):
        cfg = TrainConfig(iterations=2, trajectories_per_iter=6,
                          value_epochs=2)
        r1 = train("trpo", self.factory, 39, 30, cfg, seed=11)
        r2 = train("trpo", self.factory, 39, 30, cfg, seed=11)
        np.testing.assert_array_equal(r1.policy.get_flat(), r2.policy.get_flat())
        assert len(r1.history) == 2

    def test_dapg_lam0_zero_bitwise_trpo(self):
        demo = Demonstration(np.random.default_rng(0).normal(size=(10, 39)),
                             np.random.default_rng(1).uniform(-1, 1, (9, 30)),
                             "relocate", "mug")
        cfg0 = TrainConfig(iterations=2, trajectories_per_iter=6,
                           value_epochs=2, lam0=0.0)
        cfg_t = TrainConfig(iterations=2, trajectories_per_iter=6,
                            value_epochs=2)
        r_dapg = train("dapg", self.factory, 39, 30, cfg0, seed=21, demos=[demo])
        r_trpo = train("trpo", self.factory, 39, 30, cfg_t, seed=21)
        np.testing.assert_array_equal(r_dapg.policy.get_flat(),
                                      r_trpo.policy.get_flat())

    def test_gailplus_wg_zero_bitwise_trpo(self):
        demo = Demonstration(np.random.default_rng(2).normal(size=(10, 39)),
                             np.random.default_rng(3).uniform(-1, 1, (9, 30)),
                             "relocate", "mug")
        cfg0 = TrainConfig(iterations=2, trajectories_per_iter=6,
                           value_epochs=2, w_g=0.0)
        cfg_t = TrainConfig(iterations=2, trajectories_per_iter=6,
                            value_epochs=2)
        r_gail = train("gailplus", self.factory, 39, 30, cfg0, seed=22,
                       demos=[demo])
        r_trpo = train("trpo", self.factory, 39, 30, cfg_t, seed=22)
        np.testing.assert_array_equal(r_gail.policy.get_flat(),
                                      r_trpo.policy.get_flat())

    def test_evaluate_format(self):
        pol = GaussianMlpPolicy(39, 30, rng=np.random.default_rng(0))
        res = evaluate(pol, self.factory, trials=3, n_seeds=2, base_seed=9)
        m, s = parse_mean_std(res["formatted"])
        assert m == pytest.approx(round(res["mean"], 2), abs=5e-3)
        assert format_mean_std(1.0, 0.0) == "1.00 ± 0.00"
        assert parse_mean_std("1.00 ± 0.00") == (1.0, 0.0)

    def test_checkpoint_roundtrip(self, tmp_path):
        from handpipe.ilearn import load_policy, save_policy
        pol = GaussianMlpPolicy(39, 30, rng=np.random.default_rng(4))
        path = str(tmp_path / "p.npz")
        save_policy(path, pol)
        back = load_policy(path)
        np.testing.assert_array_equal(back.get_flat(), pol.get_flat())
