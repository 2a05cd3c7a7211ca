"""Counter-based seed derivation: every random stream in training descends
from one master seed through labeled SeedSequence spawn keys, so results
cannot depend on batching or worker count."""

import hashlib

import numpy as np


def _label_int(label):
    if isinstance(label, (int, np.integer)):
        return int(label) & 0xFFFFFFFF
    digest = hashlib.sha256(str(label).encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


def seed_for(master, *labels):
    """Deterministic 64-bit seed derived from the master seed and labels."""
    ss = np.random.SeedSequence(entropy=int(master) & 0xFFFFFFFFFFFF,
                                spawn_key=tuple(_label_int(l) for l in labels))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_for(master, *labels):
    return np.random.default_rng(seed_for(master, *labels))
