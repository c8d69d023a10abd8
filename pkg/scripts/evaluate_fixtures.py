#!/usr/bin/env python3
"""Evaluate a trained network on the named benchmark states or processes.

Trains a full-data network for the chosen task and reports per-fixture
fidelity against the linear-inversion reconstruction of the same noisy
measurement vector (sigma = 0.01 by default), at full data and optionally
at reduced sizes.

Example:
    python scripts/evaluate_fixtures.py --task qpt2 --out runs/fix \
        --size 20000 --epochs 100 --mdata 160,200
"""

import argparse
import sys

from tomonet.cli import main as tomonet


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--task", required=True, choices=["qst2", "qst3", "qpt2"])
    ap.add_argument("--out", required=True)
    ap.add_argument("--size", type=int, default=20000)
    ap.add_argument("--epochs", type=int, default=100)
    ap.add_argument("--mdata", default="", help="optional reduced sizes")
    ap.add_argument("--noise-sigma", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--min-fidelity", type=float, default=None)
    args = ap.parse_args()

    ckpt = f"{args.out}/{args.task}_s{args.size}_e{args.epochs}.tnck"
    steps = [
        ["generate", "--task", args.task, "--out", args.out,
         "--sizes", str(args.size), "--mdata", "full", "--seed", str(args.seed)],
        ["train", "--task", args.task, "--out", args.out,
         "--sizes", str(args.size), "--epochs", str(args.epochs),
         "--seed", str(args.seed)],
    ]
    fix = ["fixtures", "--task", args.task, "--out", args.out,
           "--checkpoint", ckpt, "--noise-sigma", str(args.noise_sigma)]
    if args.mdata:
        fix += ["--mdata", args.mdata]
    if args.min_fidelity is not None:
        fix += ["--min-fidelity", str(args.min_fidelity)]
    steps.append(fix)
    steps.append(["report", "--out", args.out, "--expect", "manifest,fixtures"])
    for argv in steps:
        code = tomonet(argv)
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
