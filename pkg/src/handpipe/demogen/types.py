"""Demonstration container and the .demo text format.

.demo layout (text mode, line-oriented JSON):
  header: {"format": "demo", "version": 1, "task": ..., "object": ...,
           "rate_hz": 100, "state_dim": ..., "action_dim": <or absent>,
           "target": <or absent>}
  frame records, in time order: {"s": [state...]} with an additional
  "a": [action...] on every record except the last when actions are
  present. Keys sorted, fixed separators: identical demos serialize to
  identical bytes.
"""

from dataclasses import dataclass

import numpy as np

from ..textio import read_records, write_records

DEMO_VERSION = 1
DEMO_RATE_HZ = 100.0


@dataclass
class Demonstration:
    states: np.ndarray            # (T, state_dim)
    actions: np.ndarray | None    # (T-1, action_dim) in [-1, 1], or None
    task: str
    object_id: str
    target: np.ndarray | None = None
    rate_hz: float = DEMO_RATE_HZ

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        if self.actions is not None:
            self.actions = np.asarray(self.actions, dtype=float)
            if len(self.actions) != len(self.states) - 1:
                raise ValueError("need len(actions) == len(states) - 1")
            if np.any(np.abs(self.actions) > 1.0 + 1e-12):
                raise ValueError("actions must lie in [-1, 1]")
        if self.target is not None:
            self.target = np.asarray(self.target, dtype=float)
        if self.rate_hz != DEMO_RATE_HZ:
            raise ValueError("demonstrations are fixed at 100 Hz")

    def __len__(self):
        return len(self.states)

    @property
    def state_dim(self):
        return self.states.shape[1]


def save_demonstration(path, demo: Demonstration):
    header = {"format": "demo", "version": DEMO_VERSION, "task": demo.task,
              "object": demo.object_id, "rate_hz": demo.rate_hz,
              "state_dim": int(demo.state_dim)}
    if demo.actions is not None:
        header["action_dim"] = int(demo.actions.shape[1])
    if demo.target is not None:
        header["target"] = demo.target.tolist()
    records = []
    for i, s in enumerate(demo.states):
        rec = {"s": s.tolist()}
        if demo.actions is not None and i < len(demo.actions):
            rec["a"] = demo.actions[i].tolist()
        records.append(rec)
    write_records(path, header, records)


def load_demonstration(path) -> Demonstration:
    header, records = read_records(path, expect_format="demo",
                                   expect_version=DEMO_VERSION)
    states = np.array([r["s"] for r in records])
    actions = None
    if "action_dim" in header:
        actions = np.array([r["a"] for r in records[:-1]])
    target = np.asarray(header["target"]) if "target" in header else None
    return Demonstration(states, actions, header["task"], header["object"],
                         target, header["rate_hz"])
