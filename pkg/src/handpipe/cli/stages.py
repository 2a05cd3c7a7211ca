"""Pipeline stages: each reads its predecessor's files from the output
directory, writes versioned artifacts plus a quality report, and records
itself in the manifest."""

import json
import os

import numpy as np

from ..demogen import build_demonstration, load_demonstration, save_demonstration
from ..ilearn import (TrainConfig, evaluate, format_mean_std, load_policy,
                      save_policy, seed_for, train)
from ..kinematics import builtin_model, hand_joints_3d
from ..posefit import (PoseSequence, default_cameras, fit_objective,
                       load_pose_sequence, postprocess_sequence,
                       save_pose_sequence, solve_hand_pose, solve_object_pose,
                       synthesize_observations)
from ..retarget import (load_robot_trajectory, retarget_sequence,
                        save_robot_trajectory, tsv_human, tsv_residual)
from ..simenv import CONTAINER, MUG_RECEPTACLE, make_env
from ..so3 import exp_so3
from ..transforms import RigidTransform
from .config import env_config
from .obsio import load_observations, save_observations
from .synthscene import script_scene

MANIFEST_VERSION = 1


def _manifest_path(out):
    return os.path.join(out, "manifest.json")


def _update_manifest(out, stage, payload):
    os.makedirs(out, exist_ok=True)
    path = _manifest_path(out)
    manifest = {"version": MANIFEST_VERSION, "stages": {}}
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    manifest["stages"][stage] = payload
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _require_stage(out, stage):
    path = _manifest_path(out)
    if not os.path.exists(path):
        raise FileNotFoundError(f"missing manifest in {out}; run earlier stages")
    with open(path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if stage not in manifest.get("stages", {}):
        raise FileNotFoundError(f"stage {stage!r} has not produced outputs in {out}")
    return manifest["stages"][stage]


def object_keypoints(spec):
    """Model-frame keypoints of the object proxy (non-collinear by
    construction)."""
    if spec.kind == "cylinder":
        r, h = spec.dims
        ring = [(r, 0), (0, r), (-r, 0), (0, -r)]
        return np.array([[x, y, z] for z in (-h / 2, h / 2) for x, y in ring])
    if spec.kind == "box":
        lx, ly, lz = (d / 2 for d in spec.dims)
        return np.array([[sx * lx, sy * ly, sz * lz]
                         for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)],
                        dtype=float)
    r, cl = spec.dims
    half = cl / 2 + r
    return np.array([[-half, 0, 0], [half, 0, 0],
                     [0, r, 0], [0, -r, 0], [0, 0, r], [0, 0, -r]])


def stage_synth(cfg):
    out = cfg["out"]
    scenes_dir = os.path.join(out, "scenes")
    os.makedirs(scenes_dir, exist_ok=True)
    ecfg = env_config(cfg)
    cams = default_cameras(int(cfg["cameras"]))
    human = builtin_model("human_hand")
    noise = cfg["noise"]
    files = []
    n = int(cfg["scene"]["n_demos"])
    for i in range(n):
        scene_seed = seed_for(cfg["seed"], "scene", i)
        seq = script_scene(ecfg, scene_seed,
                           duration=float(cfg["scene"]["duration_s"]))
        kp_model = object_keypoints(ecfg.object_spec)
        frames = synthesize_observations(seq, cams, noise, kp_model, human,
                                         seed=seed_for(cfg["seed"], "obs", i))
        rng = np.random.default_rng(seed_for(cfg["seed"], "init", i))
        sigma = float(noise.get("init_sigma", 0.0))
        inits = []
        for _, hand, _ in seq.frames:
            init = hand.copy()
            if sigma > 0:
                init.theta = np.clip(init.theta + rng.normal(0, sigma, 45),
                                     -0.65, 1.85)
                init.root = RigidTransform(
                    init.root.rotation @ exp_so3(rng.normal(0, sigma, 3)),
                    init.root.translation + rng.normal(0, sigma * 0.1, 3))
            inits.append(init)
        base = os.path.join(scenes_dir, f"scene_{i:03d}")
        save_pose_sequence(base + ".poseq", seq)
        save_observations(base + ".obs", cams, frames, inits)
        files.append(base + ".poseq")
    _update_manifest(out, "synth", {"version": 1, "count": n, "files": files})
    return files


def stage_fitpose(cfg):
    out = cfg["out"]
    _require_stage(out, "synth")
    fit_dir = os.path.join(out, "fitpose")
    os.makedirs(fit_dir, exist_ok=True)
    human = builtin_model("human_hand")
    fit_cfg = cfg["fit"]
    n = int(cfg["scene"]["n_demos"])
    files = []
    report = {"scenes": []}
    for i in range(n):
        base = os.path.join(out, "scenes", f"scene_{i:03d}")
        gt = load_pose_sequence(base + ".poseq")
        cams, frames, inits = load_observations(base + ".obs")
        fitted = []
        objects = []
        prev = None
        total_cost = 0.0
        for t, (kp, hob) in enumerate(frames):
            init = prev if prev is not None else inits[t]
            pose, info = solve_hand_pose(human, init, hob,
                                         lam=float(fit_cfg["lam"]),
                                         max_iter=int(fit_cfg["max_iter"]))
            total_cost += info.cost
            obj_pose, _ = solve_object_pose(kp)
            fitted.append(pose)
            objects.append(obj_pose)
            prev = pose
        if bool(fit_cfg.get("postprocess", True)) and len(fitted) >= 2:
            obs_seq = [hob for _, hob in frames]
            fitted = postprocess_sequence(human, fitted, obs_seq,
                                          mu=float(fit_cfg["mu"]),
                                          sweeps=2, iters_per_frame=6)
        err = 0.0
        for pose, (_, hand_gt, _) in zip(fitted, gt.frames):
            err += float(np.linalg.norm(hand_joints_3d(human, pose)
                                        - hand_joints_3d(human, hand_gt),
                                        axis=1).mean())
        seq_fit = PoseSequence(
            [(t, pose, obj) for (t, _, _), pose, obj
             in zip(gt.frames, fitted, objects)], gt.rate_hz)
        path = os.path.join(fit_dir, f"fit_{i:03d}.poseq")
        save_pose_sequence(path, seq_fit)
        files.append(path)
        report["scenes"].append({"scene": i,
                                 "mean_joint_error_m": err / len(fitted),
                                 "mean_fit_cost": total_cost / len(fitted)})
    report["mean_joint_error_m"] = float(
        np.mean([s["mean_joint_error_m"] for s in report["scenes"]]))
    with open(os.path.join(fit_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
    _update_manifest(out, "fitpose", {"version": 1, "files": files,
                                      "mean_joint_error_m": report["mean_joint_error_m"]})
    return report


def _load_sequences(cfg):
    out = cfg["out"]
    source = cfg["retarget"].get("source", "fit")
    n = int(cfg["scene"]["n_demos"])
    seqs = []
    for i in range(n):
        if source == "fit":
            _require_stage(out, "fitpose")
            path = os.path.join(out, "fitpose", f"fit_{i:03d}.poseq")
        else:
            _require_stage(out, "synth")
            path = os.path.join(out, "scenes", f"scene_{i:03d}.poseq")
        seqs.append(load_pose_sequence(path))
    return seqs


def stage_retarget(cfg):
    out = cfg["out"]
    rt_dir = os.path.join(out, "retarget")
    os.makedirs(rt_dir, exist_ok=True)
    human = builtin_model("human_hand")
    robot = builtin_model("robot_hand_30dof")
    alpha = float(cfg["retarget"]["alpha"])
    files = []
    report = {"scenes": []}
    for i, seq in enumerate(_load_sequences(cfg)):
        traj = retarget_sequence(seq, human, robot, alpha=alpha)
        residual = float(np.mean(
            [tsv_residual(robot, q, tsv_human(human, hand))
             for (t, q), (_, hand, _) in zip(traj.frames, seq.frames)]))
        path = os.path.join(rt_dir, f"traj_{i:03d}.rjt")
        save_robot_trajectory(path, traj)
        files.append(path)
        report["scenes"].append({"scene": i, "mean_tsv_residual_m2": residual})
    with open(os.path.join(rt_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
    _update_manifest(out, "retarget", {"version": 1, "files": files})
    return report


def stage_demogen(cfg):
    out = cfg["out"]
    _require_stage(out, "retarget")
    demo_dir = os.path.join(out, "demos")
    os.makedirs(demo_dir, exist_ok=True)
    robot = builtin_model("robot_hand_30dof")
    task = cfg["task"]
    state_only = bool(cfg["demogen"].get("state_only", False))
    container = None
    if task == "pour":
        container = np.array([0.0, 0.0, CONTAINER["height"] / 2])
    elif task == "place_inside":
        container = np.array([0.0, 0.0, MUG_RECEPTACLE["height"] / 2])
    files = []
    report = {"scenes": []}
    for i, seq in enumerate(_load_sequences(cfg)):
        traj = load_robot_trajectory(
            os.path.join(out, "retarget", f"traj_{i:03d}.rjt"), robot)
        demo, rep = build_demonstration(seq, traj, task, cfg["object"],
                                        with_actions=not state_only,
                                        container_pos=container)
        path = os.path.join(demo_dir, f"demo_{i:03d}.demo")
        save_demonstration(path, demo)
        files.append(path)
        report["scenes"].append(rep)
    with open(os.path.join(demo_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
    _update_manifest(out, "demogen", {"version": 1, "files": files,
                                      "state_only": state_only})
    return report


def _load_demos(cfg):
    out = cfg["out"]
    info = _require_stage(out, "demogen")
    demos = [load_demonstration(p) for p in info["files"]]
    limit = cfg["train"].get("demo_count")
    if limit is not None:
        demos = demos[:int(limit)]
    return demos


def _train_config(cfg):
    fields = TrainConfig.__dataclass_fields__
    kwargs = {k: v for k, v in cfg["train"].items() if k in fields}
    return TrainConfig(**kwargs)


def stage_train(cfg):
    out = cfg["out"]
    train_dir = os.path.join(out, "train")
    os.makedirs(train_dir, exist_ok=True)
    ecfg = env_config(cfg)
    algo = cfg["train"]["algo"]
    demos = []
    if algo != "trpo" and int(cfg["train"].get("demo_count") or 1) > 0:
        demos = _load_demos(cfg)
        if algo == "soil":
            for d in demos:
                if d.actions is not None:
                    raise ValueError(
                        "soil expects state-only demos; rebuild the demogen "
                        "stage with demogen.state_only=true")
    tc = _train_config(cfg)
    factory = lambda batch: make_env(ecfg, batch)   # noqa: E731
    files = []
    for s in cfg["train"]["seeds"]:
        metrics = os.path.join(train_dir, f"metrics_seed{s}.csv")
        result = train(algo, factory, ecfg.obs_dim, 30, tc,
                       seed=seed_for(cfg["seed"], "train", s), demos=demos,
                       metrics_path=metrics)
        ckpt = os.path.join(train_dir, f"policy_{algo}_seed{s}.npz")
        save_policy(ckpt, result.policy)
        files.append(ckpt)
    _update_manifest(out, "train", {"version": 1, "algo": algo,
                                    "files": files,
                                    "seeds": list(cfg["train"]["seeds"])})
    return files


def stage_eval(cfg):
    out = cfg["out"]
    info = _require_stage(out, "train")
    ecfg = env_config(cfg)
    factory = lambda batch: make_env(ecfg, batch)   # noqa: E731
    rows = []
    per_seed = []
    for s, ckpt in zip(info["seeds"], info["files"]):
        policy = load_policy(ckpt)
        res = evaluate(policy, factory, trials=int(cfg["eval"]["trials"]),
                       n_seeds=1, base_seed=seed_for(cfg["seed"], "evalseed", s))
        rate = res["mean"]
        per_seed.append(rate)
        rows.append([cfg["task"], cfg["object"], info["algo"], str(s),
                     f"{rate:.4f}"])
    mean, std = float(np.mean(per_seed)), float(np.std(per_seed))
    rows.append([cfg["task"], cfg["object"], info["algo"], "aggregate",
                 format_mean_std(mean, std)])
    eval_dir = os.path.join(out, "eval")
    os.makedirs(eval_dir, exist_ok=True)
    path = os.path.join(eval_dir, "results.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("task,object,algo,seed,success_rate\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    _update_manifest(out, "eval", {"version": 1, "files": [path],
                                   "mean": mean, "std": std})
    return rows
