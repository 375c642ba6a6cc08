#!/usr/bin/env python3
"""End-to-end demo on the committed 4x4 fixture.

Runs a recombination chain and a random-tree ensemble, prints their seat
distributions next to the seed plan, and leaves all output files under
out/demo/. Everything is seeded; reruns are byte-identical.
"""
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from mapchain.cli import main

CFG = "tests/fixtures/grid4/chain.cfg"


def run() -> int:
    for args in (
        ["chain", "--config", CFG, "--set", "steps=400",
         "--set", "out_dir=out/demo/chain"],
        ["tree", "--config", CFG, "--set", "n_plans=200",
         "--set", "out_dir=out/demo/tree"],
        ["score", "--config", CFG, "--set", "out_dir=out/demo/score"],
        ["sweep", "--config", CFG, "--set", "steps=120", "--set", "burn_in=20",
         "--set", "n_plans=60", "--set", "out_dir=out/demo/sweep"],
    ):
        print(f"\n$ mapchain {' '.join(args)}")
        code = main(args)
        if code != 0:
            return code
    print("\ndemo outputs under out/demo/")
    return 0


if __name__ == "__main__":
    raise SystemExit(run())
