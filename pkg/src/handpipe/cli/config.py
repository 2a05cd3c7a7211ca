"""Pipeline configuration: one YAML file with per-stage sections; command
line --set overrides take precedence over file values, which take
precedence over the defaults below."""

import copy

import yaml

DEFAULTS = {
    "task": "relocate",
    "object": "mug",
    "out": "runs/exp",
    "seed": 0,
    "scene": {"n_demos": 10, "duration_s": 10.0},
    "cameras": 2,
    "noise": {"px_sigma": 0.0, "depth_sigma": 0.0, "kp_sigma": 0.0,
              "init_sigma": 0.0},
    "fit": {"lam": 0.001, "mu": 0.01, "postprocess": True, "max_iter": 60},
    "retarget": {"alpha": 0.008, "source": "fit"},
    "demogen": {"state_only": False},
    "env": {"scale": 1.0, "friction": 1.0, "horizon": 200},
    "train": {"algo": "dapg", "iterations": 100, "trajectories_per_iter": 50,
              "seeds": [0, 1, 2], "demo_count": None},
    "eval": {"trials": 100},
}


def _deep_update(base, override):
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], val)
        else:
            base[key] = val
    return base


def _parse_value(text):
    return yaml.safe_load(text)


def apply_set(cfg, dotted, value):
    keys = dotted.split(".")
    node = cfg
    for k in keys[:-1]:
        if k not in node or not isinstance(node[k], dict):
            node[k] = {}
        node = node[k]
    node[keys[-1]] = _parse_value(value)


def load_config(path=None, sets=(), **direct):
    cfg = copy.deepcopy(DEFAULTS)
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            file_cfg = yaml.safe_load(fh) or {}
        _deep_update(cfg, file_cfg)
    for item in sets:
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        apply_set(cfg, key.strip(), value.strip())
    for key, val in direct.items():
        if val is not None:
            apply_set(cfg, key, str(val))
    return cfg


def env_config(cfg):
    from ..simenv import EnvConfig
    return EnvConfig(task=cfg["task"], object_id=cfg["object"],
                     scale=float(cfg["env"]["scale"]),
                     friction=float(cfg["env"]["friction"]),
                     horizon=int(cfg["env"]["horizon"]))
