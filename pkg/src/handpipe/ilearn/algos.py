"""Demonstration-augmented gradients: DAPG demo term, GAIL+ reward shaping,
and SOIL inverse-model action filling."""

import numpy as np


def dapg_gradient(policy, obs, act, adv, demo_obs, demo_act, k, lam0, lam1):
    """On-policy term sum_i grad log pi(a_i|s_i) A_i plus the demo term
    sum_demo grad log pi(a|s) * lam0 * lam1^k * max_batch(A).

    The max runs over the same (normalized) advantage estimates used by the
    on-policy term; with lam0 = 0 the result is bit-identical to the plain
    policy gradient.
    """
    if demo_obs is None or len(demo_obs) == 0:
        raise ValueError("DAPG needs non-empty state-action demonstrations")
    g_pg = policy.weighted_logprob_grad(obs, act, adv)
    scale = lam0 * (lam1 ** k) * float(np.max(adv))
    weights = np.full(len(demo_obs), scale)
    g_demo = policy.weighted_logprob_grad(demo_obs, demo_act, weights)
    return g_pg + g_demo


def gail_plus_reward(r_env, d_values, w_g):
    """Shaped reward r_env + w_g * (-log D); D is already clamped into
    (0, 1) by the discriminator, so the bonus is finite."""
    return np.asarray(r_env, dtype=float) + w_g * (-np.log(d_values))


def gail_update(disc, policy_obs, policy_act, demo_obs, demo_act, rng,
                steps=5, batch=256, lr=1e-3):
    """A few minibatch ascent steps on E_pi[log D] + E_demo[log(1 - D)]
    (policy samples pushed toward 1, demonstrations toward 0)."""
    n_p = len(policy_obs)
    n_d = len(demo_obs)
    sa_p = np.concatenate([policy_obs, policy_act], axis=1)
    sa_d = np.concatenate([demo_obs, demo_act], axis=1)
    losses = []
    for _ in range(steps):
        ip = rng.integers(0, n_p, size=min(batch, n_p))
        idx = rng.integers(0, n_d, size=min(batch, n_d))
        losses.append(disc.update(sa_p[ip], sa_d[idx], lr=lr))
    return losses


def soil_fill_demos(inverse_model, demo_states_list):
    """Predict actions for state-only demos; returns stacked (s, a) pairs.

    inverse_model is either an InverseModel or any callable
    (s, s_next) -> actions (the oracle hook used by the equivalence tests).
    Predictions are clipped to the action box.
    """
    obs_out, act_out = [], []
    predict = (inverse_model.predict if hasattr(inverse_model, "predict")
               else inverse_model)
    for states in demo_states_list:
        s = states[:-1]
        s_next = states[1:]
        a = np.clip(predict(s, s_next), -1.0, 1.0)
        obs_out.append(s)
        act_out.append(a)
    return np.concatenate(obs_out), np.concatenate(act_out)


def soil_update(inverse_model, trans_s, trans_s_next, trans_a,
                demo_states_list, rng, epochs=5, batch=256, lr=1e-3):
    """Fit the inverse model on on-policy transitions, then fill the
    state-only demos. Returns (filled_obs, filled_act, final_mse)."""
    losses = inverse_model.fit(trans_s, trans_s_next, trans_a,
                               epochs=epochs, batch=batch, lr=lr, rng=rng)
    filled_obs, filled_act = soil_fill_demos(inverse_model, demo_states_list)
    return filled_obs, filled_act, losses[-1]
