"""Zero-phase low-pass filtering for position and rotation sequences.

The filter applies the exact order-2 Butterworth magnitude response
|H(f)| = 1/sqrt(1 + (f/fc)^4) twice (forward-backward equivalent, zero
phase) in the frequency domain, with odd-reflection padding to suppress
boundary wraparound. DC gain is exactly 1 and the operator is linear.
"""

import numpy as np

from ..so3 import continuous_log, exp_so3, log_so3


def butterworth_gain(f, fc, order=2):
    """Single-pass analog Butterworth magnitude at frequency f."""
    f = np.asarray(f, dtype=float)
    return 1.0 / np.sqrt(1.0 + (f / fc) ** (2 * order))


def lowpass(seq, fs=100.0, fc=5.0, order=2, passes=2):
    """Zero-phase low-pass of a (N,) or (N, d) sequence; output length N."""
    if fc >= fs / 2:
        raise ValueError("cutoff must be below the Nyquist frequency")
    x = np.asarray(seq, dtype=float)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    n = x.shape[0]
    if n < 4:
        raise ValueError("need at least 4 samples")
    pad = min(n - 1, max(int(3 * fs / fc), 16))
    # odd reflection preserves level and slope at the ends
    pre = 2.0 * x[0] - x[pad:0:-1]
    post = 2.0 * x[-1] - x[-2:-pad - 2:-1]
    ext = np.concatenate([pre, x, post], axis=0)
    m = ext.shape[0]
    spec = np.fft.rfft(ext, axis=0)
    gain = butterworth_gain(np.fft.rfftfreq(m, 1.0 / fs), fc, order) ** passes
    y = np.fft.irfft(spec * gain[:, None], n=m, axis=0)[pad:pad + n]
    return y[:, 0] if squeeze else y


def so3_lowpass(rotations, fs=100.0, fc=5.0, order=2):
    """Low-pass a rotation sequence through the log map.

    The sequence must be angularly continuous: consecutive relative
    rotations under pi - 0.1. The log trajectory is unwrapped for
    continuity, filtered per axis, and mapped back.
    """
    rotations = [np.asarray(R, dtype=float) for R in rotations]
    ws = np.zeros((len(rotations), 3))
    w_prev = np.zeros(3)
    for i, R in enumerate(rotations):
        if i > 0:
            rel = rotations[i - 1].T @ R
            ang = np.linalg.norm(log_so3(rel))
            if ang >= np.pi - 0.1:
                raise ValueError(f"rotation step at frame {i} too close to pi")
        w = continuous_log(R, w_prev)
        ws[i] = w
        w_prev = w
    ws_f = lowpass(ws, fs, fc, order)
    return [exp_so3(w) for w in ws_f]
