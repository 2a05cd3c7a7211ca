"""Two-layer tanh MLPs with hand-rolled float64 gradients.

The networks here are small enough that explicit backprop is simpler and
more controllable than a framework: gradients check against central
differences at 1e-4, and the Gaussian policy exposes the exact
Fisher-vector product needed by the trust-region step.
"""

import numpy as np

LOG2PI = np.log(2.0 * np.pi)

# fixed row padding for rollout-time forward passes: BLAS sees constant
# shapes, so results do not depend on how many episodes run in lockstep
PAD_ROWS = 64


class Adam:
    def __init__(self, size, lr=1e-3, b1=0.9, b2=0.999, eps=1e-8):
        self.lr = lr
        self.b1, self.b2, self.eps = b1, b2, eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, params, grad):
        self.t += 1
        self.m = self.b1 * self.m + (1 - self.b1) * grad
        self.v = self.b2 * self.v + (1 - self.b2) * grad * grad
        mhat = self.m / (1 - self.b1**self.t)
        vhat = self.v / (1 - self.b2**self.t)
        return params - self.lr * mhat / (np.sqrt(vhat) + self.eps)


class Mlp:
    """tanh-tanh-linear network stored as a flat parameter vector."""

    def __init__(self, in_dim, out_dim, hidden=(64, 64), out_scale=1.0,
                 rng=None):
        rng = rng or np.random.default_rng(0)
        self.sizes = [in_dim, *hidden, out_dim]
        ws, bs = [], []
        for i in range(len(self.sizes) - 1):
            fan_in = self.sizes[i]
            w = rng.normal(0.0, 1.0 / np.sqrt(fan_in),
                           size=(fan_in, self.sizes[i + 1]))
            if i == len(self.sizes) - 2:
                w *= out_scale
            ws.append(w)
            bs.append(np.zeros(self.sizes[i + 1]))
        self.weights = ws
        self.biases = bs

    # flat parameter view -------------------------------------------------
    def get_flat(self):
        return np.concatenate([w.ravel() for w in self.weights]
                              + [b.ravel() for b in self.biases])

    def set_flat(self, flat):
        off = 0
        for i, w in enumerate(self.weights):
            self.weights[i] = flat[off:off + w.size].reshape(w.shape).copy()
            off += w.size
        for i, b in enumerate(self.biases):
            self.biases[i] = flat[off:off + b.size].copy()
            off += b.size

    @property
    def n_params(self):
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)

    def _split(self, flat):
        out = []
        off = 0
        for w in self.weights:
            out.append(flat[off:off + w.size].reshape(w.shape))
            off += w.size
        for b in self.biases:
            out.append(flat[off:off + b.size])
            off += b.size
        k = len(self.weights)
        return out[:k], out[k:]

    # forward / backward ---------------------------------------------------
    def forward(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        hs = [x]
        h = x
        for i in range(len(self.weights) - 1):
            h = np.tanh(h @ self.weights[i] + self.biases[i])
            hs.append(h)
        y = h @ self.weights[-1] + self.biases[-1]
        return y, hs

    def forward_padded(self, x):
        """Forward with the batch padded to a fixed row count (rollouts)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n = x.shape[0]
        if n >= PAD_ROWS:
            return self.forward(x)[0]
        xp = np.zeros((PAD_ROWS, x.shape[1]))
        xp[:n] = x
        return self.forward(xp)[0][:n]

    def backward(self, hs, dy):
        """Gradients of sum(dy * y) wrt parameters; returns (flat_grad, dx)."""
        gw = [None] * len(self.weights)
        gb = [None] * len(self.biases)
        gw[-1] = hs[-1].T @ dy
        gb[-1] = dy.sum(axis=0)
        dh = dy @ self.weights[-1].T
        for i in range(len(self.weights) - 2, -1, -1):
            dz = dh * (1.0 - hs[i + 1] ** 2)
            gw[i] = hs[i].T @ dz
            gb[i] = dz.sum(axis=0)
            dh = dz @ self.weights[i].T
        flat = np.concatenate([g.ravel() for g in gw] + [g.ravel() for g in gb])
        return flat, dh

    def jvp(self, hs, v_flat):
        """Directional derivative of the output along a parameter direction."""
        vw, vb = self._split(v_flat)
        dh = np.zeros_like(hs[0])
        for i in range(len(self.weights) - 1):
            dz = hs[i] @ vw[i] + vb[i] + dh @ self.weights[i]
            dh = (1.0 - hs[i + 1] ** 2) * dz
        return hs[-1] @ vw[-1] + vb[-1] + dh @ self.weights[-1]


class GaussianMlpPolicy:
    """Diagonal Gaussian policy: MLP mean, state-independent log-std."""

    def __init__(self, obs_dim, act_dim, hidden=(64, 64), log_std_init=-1.0,
                 rng=None):
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.mean_net = Mlp(obs_dim, act_dim, hidden, out_scale=0.01, rng=rng)
        self.log_std = np.full(act_dim, float(log_std_init))

    # parameters -----------------------------------------------------------
    def get_flat(self):
        return np.concatenate([self.mean_net.get_flat(), self.log_std])

    def set_flat(self, flat):
        n = self.mean_net.n_params
        self.mean_net.set_flat(flat[:n])
        self.log_std = flat[n:].copy()

    @property
    def n_params(self):
        return self.mean_net.n_params + self.act_dim

    # distribution ----------------------------------------------------------
    def mean(self, obs):
        return self.mean_net.forward_padded(obs)

    def act(self, obs, noise=None):
        mu = self.mean(obs)
        if noise is None:
            return mu
        return mu + np.exp(self.log_std) * noise

    def log_prob(self, obs, act, mu=None):
        if mu is None:
            mu = self.mean_net.forward(obs)[0]
        z = (np.atleast_2d(act) - mu) / np.exp(self.log_std)
        return (-0.5 * np.sum(z * z, axis=1) - np.sum(self.log_std)
                - 0.5 * self.act_dim * LOG2PI)

    def log_prob_rows(self, obs, act):
        """Rollout-time log-probs with the padded forward pass."""
        mu = self.mean(obs)
        z = (np.atleast_2d(act) - mu) / np.exp(self.log_std)
        return (-0.5 * np.sum(z * z, axis=1) - np.sum(self.log_std)
                - 0.5 * self.act_dim * LOG2PI)

    def weighted_logprob_grad(self, obs, act, w):
        """Gradient of sum_i w_i log pi(a_i | s_i) wrt the flat parameters."""
        y, hs = self.mean_net.forward(obs)
        a = np.atleast_2d(act)
        w = np.asarray(w, dtype=float)[:, None]
        var = np.exp(2.0 * self.log_std)
        dy = w * (a - y) / var
        g_mlp, _ = self.mean_net.backward(hs, dy)
        z2 = ((a - y) ** 2) / var
        g_logstd = np.sum(w * (z2 - 1.0), axis=0)
        return np.concatenate([g_mlp, g_logstd])

    def fisher_vector_product(self, obs, v, damping=0.0):
        """Mean-KL Hessian times v: J^T diag(1/sigma^2) J v / N on the mean
        block, 2 v on the log-std block (exact for state-independent
        diagonal Gaussians)."""
        y, hs = self.mean_net.forward(obs)
        nb = self.mean_net.n_params
        jv = self.mean_net.jvp(hs, v[:nb])
        inv_var = np.exp(-2.0 * self.log_std)
        g_mlp, _ = self.mean_net.backward(hs, jv * inv_var / y.shape[0])
        g_logstd = 2.0 * v[nb:]
        return np.concatenate([g_mlp, g_logstd]) + damping * v

    def kl_from(self, obs, mu_old, log_std_old):
        """Mean KL(old || current) over the batch, closed form."""
        mu = self.mean_net.forward(obs)[0]
        var = np.exp(2.0 * self.log_std)
        var_old = np.exp(2.0 * log_std_old)
        per_dim = (self.log_std - log_std_old
                   + (var_old + (mu_old - mu) ** 2) / (2.0 * var) - 0.5)
        return float(np.mean(np.sum(per_dim, axis=1)))


class ValueMlp:
    def __init__(self, obs_dim, hidden=(64, 64), rng=None):
        self.net = Mlp(obs_dim, 1, hidden, out_scale=0.1, rng=rng)
        self.opt = None

    def value(self, obs):
        return self.net.forward(obs)[0][:, 0]

    def value_rows(self, obs):
        return self.net.forward_padded(obs)[:, 0]

    def fit(self, obs, targets, epochs=10, batch=256, lr=1e-3, rng=None):
        rng = rng or np.random.default_rng(0)
        if self.opt is None or self.opt.lr != lr:
            self.opt = Adam(self.net.n_params, lr=lr)
        n = obs.shape[0]
        losses = []
        for _ in range(epochs):
            order = rng.permutation(n)
            for start in range(0, n, batch):
                idx = order[start:start + batch]
                y, hs = self.net.forward(obs[idx])
                err = y[:, 0] - targets[idx]
                g, _ = self.net.backward(hs, (2.0 * err / len(idx))[:, None])
                self.net.set_flat(self.opt.step(self.net.get_flat(), g))
            losses.append(float(np.mean((self.value(obs) - targets) ** 2)))
        return losses

    def loss_and_grad(self, obs, targets):
        y, hs = self.net.forward(obs)
        err = y[:, 0] - targets
        g, _ = self.net.backward(hs, (2.0 * err / len(err))[:, None])
        return float(np.mean(err**2)), g


class Discriminator:
    """2-layer classifier on (s, a); sigmoid output strictly inside (0, 1)."""

    CLAMP = 1e-6

    def __init__(self, obs_dim, act_dim, hidden=(64, 64), rng=None):
        self.net = Mlp(obs_dim + act_dim, 1, hidden, out_scale=0.1, rng=rng)
        self.opt = None

    def prob(self, obs, act):
        x = np.concatenate([np.atleast_2d(obs), np.atleast_2d(act)], axis=1)
        logits = self.net.forward(x)[0][:, 0]
        return np.clip(1.0 / (1.0 + np.exp(-logits)), self.CLAMP, 1.0 - self.CLAMP)

    def loss_and_grad(self, policy_sa, demo_sa):
        """Ascent objective E_pi[log D] + E_demo[log(1 - D)]; returns the
        (negated-for-descent) loss and its gradient."""
        xp = policy_sa
        xd = demo_sa
        yp, hp = self.net.forward(xp)
        yd, hd = self.net.forward(xd)
        dp = np.clip(1.0 / (1.0 + np.exp(-yp[:, 0])), self.CLAMP, 1 - self.CLAMP)
        dd = np.clip(1.0 / (1.0 + np.exp(-yd[:, 0])), self.CLAMP, 1 - self.CLAMP)
        objective = np.mean(np.log(dp)) + np.mean(np.log(1.0 - dd))
        # d objective / d logits
        gp = (1.0 - dp) / len(dp)
        gd = -dd / len(dd)
        g1, _ = self.net.backward(hp, gp[:, None])
        g2, _ = self.net.backward(hd, gd[:, None])
        return -float(objective), -(g1 + g2)

    def update(self, policy_sa, demo_sa, lr=1e-3):
        if self.opt is None or self.opt.lr != lr:
            self.opt = Adam(self.net.n_params, lr=lr)
        loss, g = self.loss_and_grad(policy_sa, demo_sa)
        self.net.set_flat(self.opt.step(self.net.get_flat(), g))
        return loss


class InverseModel:
    """h(s_t, s_{t+1}) -> a_t regression network."""

    def __init__(self, obs_dim, act_dim, hidden=(64, 64), rng=None):
        self.net = Mlp(2 * obs_dim, act_dim, hidden, out_scale=0.1, rng=rng)
        self.act_dim = act_dim
        self.opt = None

    def predict(self, s, s_next):
        x = np.concatenate([np.atleast_2d(s), np.atleast_2d(s_next)], axis=1)
        return self.net.forward(x)[0]

    def loss_and_grad(self, s, s_next, a):
        x = np.concatenate([s, s_next], axis=1)
        y, hs = self.net.forward(x)
        err = y - a
        g, _ = self.net.backward(hs, 2.0 * err / len(err))
        return float(np.mean(np.sum(err**2, axis=1))), g

    def fit(self, s, s_next, a, epochs=5, batch=256, lr=1e-3, rng=None):
        rng = rng or np.random.default_rng(0)
        if self.opt is None or self.opt.lr != lr:
            self.opt = Adam(self.net.n_params, lr=lr)
        n = s.shape[0]
        losses = []
        for _ in range(epochs):
            order = rng.permutation(n)
            for start in range(0, n, batch):
                idx = order[start:start + batch]
                _, g = self.loss_and_grad(s[idx], s_next[idx], a[idx])
                self.net.set_flat(self.opt.step(self.net.get_flat(), g))
            losses.append(self.loss_and_grad(s, s_next, a)[0])
        return losses
