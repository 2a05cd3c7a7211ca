"""Trust-region policy update: conjugate-gradient natural step with a
KL-and-improvement backtracking line search."""

from dataclasses import dataclass

import numpy as np


def conjugate_gradient(fvp, b, iters=10, tol=1e-12):
    x = np.zeros_like(b)
    r = b.copy()
    p = b.copy()
    rs = r @ r
    for _ in range(iters):
        if rs < tol:
            break
        Ap = fvp(p)
        alpha = rs / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        rs_new = r @ r
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x


@dataclass
class TrpoDiagnostics:
    kl: float
    surrogate_improvement: float
    accepted: bool
    step_scale: float
    grad_norm: float


def surrogate(policy, obs, act, adv, logp_old):
    logp = policy.log_prob(obs, act)
    return float(np.sum(np.exp(logp - logp_old) * adv))


def trpo_update(policy, obs, act, adv, logp_old, gradient=None, kl_limit=0.01,
                cg_iters=10, cg_damping=0.1, backtracks=10):
    """One natural-gradient step; on line-search exhaustion the parameters
    are left untouched (zero step). Raises on a non-finite gradient.
    Returns TrpoDiagnostics with the measured KL of the accepted step."""
    if gradient is None:
        gradient = policy.weighted_logprob_grad(obs, act, adv)
    if not np.all(np.isfinite(gradient)):
        raise FloatingPointError("non-finite policy gradient")
    theta0 = policy.get_flat()
    mu_old = policy.mean_net.forward(obs)[0]
    log_std_old = policy.log_std.copy()
    surr0 = surrogate(policy, obs, act, adv, logp_old)

    def fvp(v):
        return policy.fisher_vector_product(obs, v, damping=cg_damping)

    direction = conjugate_gradient(fvp, gradient, iters=cg_iters)
    dfd = direction @ fvp(direction)
    if dfd <= 0 or not np.isfinite(dfd):
        return TrpoDiagnostics(0.0, 0.0, False, 0.0,
                               float(np.linalg.norm(gradient)))
    full_step = np.sqrt(2.0 * kl_limit / dfd) * direction

    for j in range(backtracks):
        scale = 0.5**j
        policy.set_flat(theta0 + scale * full_step)
        kl = policy.kl_from(obs, mu_old, log_std_old)
        improvement = surrogate(policy, obs, act, adv, logp_old) - surr0
        if kl <= kl_limit and improvement >= 0.0:
            return TrpoDiagnostics(kl, improvement, True, scale,
                                   float(np.linalg.norm(gradient)))
    policy.set_flat(theta0)
    return TrpoDiagnostics(0.0, 0.0, False, 0.0,
                           float(np.linalg.norm(gradient)))
