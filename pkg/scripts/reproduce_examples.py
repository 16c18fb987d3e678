"""Run the default campaigns on the three built-in examples and write reports.

Usage: python3 scripts/reproduce_examples.py [OUT_DIR] [--trials N] [--seed S]
"""

import argparse
import os
import sys

from qep_perturb.cli import main

RUNS = [
    ("wiresaw1", ["--nu", "0.9"], 1e-8, "wiresaw_nu0.9"),
    ("wiresaw1", ["--nu", "1.0019"], 1e-8, "wiresaw_nu1.0019"),
    ("brake", ["--gamma", "0.1"], 1e-8, "brake"),
    ("jordan", [], 1e-7, "jordan"),
]


def run(out: str, trials: int, seed: int) -> int:
    status = 0
    for example, extra, eta, sub in RUNS:
        argv = ["reproduce", "--example", example, *extra, "--eta", repr(eta), "--seed", str(seed),
                "--trials", str(trials), "--out", os.path.join(out, sub), "--format", "csv,json,md"]
        status |= main(argv)
    return status


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("out", nargs="?", default="reports")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args()
    sys.exit(run(a.out, a.trials, a.seed))
