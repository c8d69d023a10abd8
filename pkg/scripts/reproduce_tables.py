#!/usr/bin/env python3
"""Reproduce the training-set-size fidelity tables for all three tasks.

Runs the full generate -> train -> table pipeline into a run directory, one
sub-run per task.  Sizes and the epoch grid are deliberately modest so the
whole thing finishes on a laptop CPU; pass --sizes/--epochs to scale up.

Example:
    python scripts/reproduce_tables.py --out runs/tables --tasks qst2,qpt2
"""

import argparse
import sys

from tomonet.cli import main as tomonet

DEFAULTS = {
    "qst2": {"sizes": "500,5000,20000", "epochs": "50", "mdata": 20},
    "qst3": {"sizes": "5000", "epochs": "50", "mdata": 120},
    "qpt2": {"sizes": "500,2000", "epochs": "50", "mdata": 200},
}


def run_task(task: str, out: str, sizes: str, epochs: str, mdata: int,
             seed: int, test_count: int) -> int:
    steps = [
        ["generate", "--task", task, "--out", out, "--sizes", sizes,
         "--mdata", "uniform:{}-{}".format(*_mdata_band(task)),
         "--seed", str(seed)],
        ["train", "--task", task, "--out", out, "--sizes", sizes,
         "--epochs", epochs, "--seed", str(seed)],
        ["table", "--task", task, "--out", out, "--sizes", sizes,
         "--epochs", epochs, "--mdata", str(mdata),
         "--test-count", str(test_count)],
    ]
    for argv in steps:
        code = tomonet(argv)
        if code != 0:
            return code
    return 0


def _mdata_band(task: str) -> tuple[int, int]:
    # training masks span the reduced regime up to the full vector
    return {"qst2": (8, 33), "qst3": (40, 169), "qpt2": (100, 256)}[task]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True, help="run directory root")
    ap.add_argument("--tasks", default="qst2,qst3,qpt2")
    ap.add_argument("--sizes", default=None, help="override per-task sizes")
    ap.add_argument("--epochs", default=None, help="override epoch grid")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--test-count", type=int, default=3000)
    args = ap.parse_args()

    for task in args.tasks.split(","):
        if task not in DEFAULTS:
            print(f"unknown task {task!r}", file=sys.stderr)
            return 2
        cfg = DEFAULTS[task]
        code = run_task(
            task, f"{args.out}/{task}",
            args.sizes or cfg["sizes"], args.epochs or cfg["epochs"],
            cfg["mdata"], args.seed, args.test_count,
        )
        if code != 0:
            return code
        tomonet(["report", "--out", f"{args.out}/{task}",
                 "--expect", "manifest,table"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
