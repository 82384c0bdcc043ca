"""Command-line entry point: ``tmkt {train,eval,solve-p,gen-synth,manifest}``."""
from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .mixup import MODES, InfeasibleRatioError, MixupPolicy


def cmd_train(args) -> int:
    from .train import load_config, run_training

    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if overrides:
        cfg = cfg.replace(**overrides)

    def show(m):
        print(f"epoch {m.epoch:3d}  total {m.losses['total']:.4f}  cls_e {m.losses['cls_e']:.4f}  "
              f"train_acc {m.train_acc:.3f}  test_acc {m.test_acc:.3f}  ({m.wall_time:.1f}s)", flush=True)

    result = run_training(cfg, progress=None if args.quiet else show)
    print(f"checkpoint {result.checkpoint_path}")
    print(f"metrics {result.metrics_path}")
    return 0


def cmd_eval(args) -> int:
    from .train import run_eval

    print(run_eval(args.ckpt, args.data, args.split).report())
    return 0


def cmd_solve_p(args) -> int:
    try:
        policy = MixupPolicy.solve(args.t, args.ratio, args.mode)
    except InfeasibleRatioError as err:
        print(f"infeasible: min ratio {err.min_ratio:.4g} (T={err.T}, mode={args.mode}, requested {err.r_m:.4g})")
        return 2
    print(f"p={policy.p:.12g}")
    print(f"residual={policy.residual:.3e}")
    print(f"mode={policy.expectation_mode}")
    return 0


def cmd_gen_synth(args) -> int:
    from .data import gen_synthetic_paired, write_dataset

    ds = gen_synthetic_paired(args.classes, args.per_class, args.size, args.size, args.t, seed=args.seed)
    try:
        write_dataset(ds, args.out)
    except OSError as err:
        print(f"cannot write dataset to {args.out}: {err}", file=sys.stderr)
        return 1
    print(f"wrote {len(ds.train)} train and {len(ds.test)} test pairs to {args.out}")
    return 0


def cmd_manifest(args) -> int:
    from .snn import build_network

    size = (args.size, args.size) if args.size else None
    net = build_network(args.arch, n_classes=args.classes, input_size=size)
    print(net.manifest())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tmkt", description="Time-step mixup transfer for spiking networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train from a key=value config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory (overrides out_dir)")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="event-head accuracy and confusion matrix of a checkpoint")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=("train", "test"), default="test")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("solve-p", help="solve the per-step replacement probability")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--ratio", type=float, required=True)
    p.add_argument("--mode", choices=MODES, default="unconditional")
    p.set_defaults(func=cmd_solve_p)

    p = sub.add_parser("gen-synth", help="write a synthetic paired dataset")
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--per-class", type=int, default=40)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=20, help="frame height and width")
    p.add_argument("--t", type=int, default=6, help="time-steps per sequence")
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("manifest", help="print the layer table of an architecture")
    p.add_argument("--arch", default="scnn_small")
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--size", type=int)
    p.set_defaults(func=cmd_manifest)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
