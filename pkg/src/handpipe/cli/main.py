"""Command-line entry point.

Subcommands: synth, fitpose, retarget, demogen, train, eval, verify, and
pipeline (all stages in order). Outputs land under --out with a manifest;
exit code 0 on success, nonzero with an error JSON on stderr otherwise.
"""

import argparse
import json
import sys
import traceback

from .config import load_config
from .stages import (stage_demogen, stage_eval, stage_fitpose, stage_retarget,
                     stage_synth, stage_train)
from .verify import run_verify

STAGES = {
    "synth": stage_synth,
    "fitpose": stage_fitpose,
    "retarget": stage_retarget,
    "demogen": stage_demogen,
    "train": stage_train,
    "eval": stage_eval,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="handpipe",
        description="hand-demonstration pipeline: synthetic scenes, pose "
                    "fitting, retargeting, demo generation, training, "
                    "evaluation")
    parser.add_argument("-c", "--config", help="YAML pipeline config")
    parser.add_argument("-o", "--out", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="master seed (overrides config)")
    parser.add_argument("--task", help="task id (relocate, pour, place_inside)")
    parser.add_argument("--object", dest="object_id", help="object id")
    parser.add_argument("--algo", help="training algorithm "
                                       "(trpo, dapg, gailplus, soil)")
    parser.add_argument("--demos", type=int, help="number of demos to use "
                                                  "(train) or generate (synth)")
    parser.add_argument("--state-only", action="store_true",
                        help="demogen: omit actions")
    parser.add_argument("--set", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config key "
                        "(dotted path), repeatable")
    parser.add_argument("command", choices=list(STAGES) + ["pipeline", "verify"])
    return parser


def config_from_args(args):
    direct = {}
    if args.out:
        direct["out"] = args.out
    if args.seed is not None:
        direct["seed"] = args.seed
    if args.task:
        direct["task"] = args.task
    if args.object_id:
        direct["object"] = args.object_id
    if args.algo:
        direct["train.algo"] = args.algo
    if args.demos is not None:
        direct["scene.n_demos"] = args.demos
        direct["train.demo_count"] = args.demos
    if args.state_only:
        direct["demogen.state_only"] = True
    return load_config(args.config, args.set, **direct)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return 0 if run_verify() else 1
        cfg = config_from_args(args)
        if args.command == "pipeline":
            for name in ("synth", "fitpose", "retarget", "demogen", "train",
                         "eval"):
                STAGES[name](cfg)
                print(f"stage {name}: done")
        else:
            STAGES[args.command](cfg)
            print(f"stage {args.command}: done")
        return 0
    except Exception as exc:   # noqa: BLE001 - CLI boundary
        err = {"error": type(exc).__name__, "message": str(exc),
               "trace": traceback.format_exc(limit=4)}
        print(json.dumps(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
