"""Damped Gauss-Newton (Levenberg-Marquardt) with box projection.

Solves min_x ||r(x)||^2 subject to lo <= x <= hi. Steps solve the damped
normal equations and are projected onto the box; a step is accepted only if
it does not increase the objective, so accepted costs are non-increasing.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class SolveInfo:
    cost: float
    iterations: int
    grad_inf: float
    converged: bool


def box_lm(fun, x0, lo=None, hi=None, max_iter=200, grad_tol=1e-6,
           step_tol=1e-9, mu0=1e-4, trace=None):
    """Minimize a sum of squares with optional box constraints.

    fun(x, need_jac) must return (r,) when need_jac is False and (r, J)
    otherwise, with r shape (m,) and J shape (m, n). Raises on non-finite
    residuals at the initial point. If trace is a list, the accepted
    objective values are appended to it.
    """
    x = np.asarray(x0, dtype=float).copy()
    n = x.size
    if lo is None:
        lo = np.full(n, -np.inf)
    if hi is None:
        hi = np.full(n, np.inf)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    x = np.clip(x, lo, hi)

    r, J = fun(x, True)
    cost = float(r @ r)
    if not np.isfinite(cost):
        raise FloatingPointError("non-finite objective at the initial point")
    if trace is not None:
        trace.append(cost)
    mu = mu0
    it = 0
    grad_inf = np.inf
    converged = False
    while it < max_iter:
        it += 1
        g = 2.0 * (J.T @ r)
        # projected gradient: ignore components pushing into an active bound
        gp = g.copy()
        gp[(x <= lo + 1e-12) & (g > 0)] = 0.0
        gp[(x >= hi - 1e-12) & (g < 0)] = 0.0
        grad_inf = float(np.max(np.abs(gp))) if n else 0.0
        if grad_inf < grad_tol:
            converged = True
            break
        # active-set reduction: variables pinned at a bound with the gradient
        # pushing outward stay fixed this iteration
        free = ~(((x <= lo + 1e-12) & (g > 0)) | ((x >= hi - 1e-12) & (g < 0)))
        Jf = J[:, free]
        jtj = Jf.T @ Jf
        diag = np.diag(jtj).copy()
        diag[diag < 1e-12] = 1e-12
        accepted = False
        for _ in range(25):
            try:
                step_f = np.linalg.solve(jtj + mu * np.diag(diag), -(Jf.T @ r))
            except np.linalg.LinAlgError:
                mu *= 4.0
                continue
            step = np.zeros(n)
            step[free] = step_f
            x_new = np.clip(x + step, lo, hi)
            dx = x_new - x
            if np.linalg.norm(dx) < step_tol:
                converged = True
                break
            r_new = fun(x_new, False)[0]
            cost_new = float(r_new @ r_new)
            if np.isfinite(cost_new) and cost_new <= cost:
                x = x_new
                cost = cost_new
                mu = max(mu / 3.0, 1e-12)
                accepted = True
                if trace is not None:
                    trace.append(cost)
                break
            mu *= 4.0
        if not accepted:
            # damping exhausted or step below tolerance: terminal
            converged = True
            break
        r, J = fun(x, True)
        cost = float(r @ r)
    return x, SolveInfo(cost, it, grad_inf, converged)
