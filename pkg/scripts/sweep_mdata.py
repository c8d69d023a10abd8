#!/usr/bin/env python3
"""Fidelity versus reduced-dataset size for a trained network.

Trains one network on masked data spanning the reduced regime, then sweeps
the number of kept data-vector entries at evaluation time.  Produces
{task}_sweep.csv in the run directory.

Example:
    python scripts/sweep_mdata.py --task qst2 --out runs/sweep2 \
        --size 20000 --epochs 100 --mdata 4,8,12,16,20,24,28,33
"""

import argparse
import sys

from tomonet.cli import main as tomonet

TRAIN_BANDS = {"qst2": "uniform:4-33", "qst3": "uniform:40-169",
               "qpt2": "uniform:100-256"}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--task", required=True, choices=sorted(TRAIN_BANDS))
    ap.add_argument("--out", required=True)
    ap.add_argument("--size", type=int, default=20000)
    ap.add_argument("--epochs", type=int, default=100)
    ap.add_argument("--mdata", required=True, help="comma-separated sweep values")
    ap.add_argument("--repeats", type=int, default=50)
    ap.add_argument("--test-count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    ckpt = f"{args.out}/{args.task}_s{args.size}_e{args.epochs}.tnck"
    steps = [
        ["generate", "--task", args.task, "--out", args.out,
         "--sizes", str(args.size), "--mdata", TRAIN_BANDS[args.task],
         "--seed", str(args.seed)],
        ["train", "--task", args.task, "--out", args.out,
         "--sizes", str(args.size), "--epochs", str(args.epochs),
         "--seed", str(args.seed)],
        ["sweep", "--task", args.task, "--out", args.out,
         "--checkpoint", ckpt, "--mdata", args.mdata,
         "--repeats", str(args.repeats), "--test-count", str(args.test_count)],
        ["report", "--out", args.out, "--expect", "manifest,sweep"],
    ]
    for argv in steps:
        code = tomonet(argv)
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
