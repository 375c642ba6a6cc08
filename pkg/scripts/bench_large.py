#!/usr/bin/env python3
"""Benchmark harness on a synthetic 10,000-node, 200-district graph.

Builds a 100x100 unit grid with a column-leaning contest, seeds a snake
band plan, and drives the bench command: read-in timing plus 1000 sampling
iterations for the unconstrained, reject-gated, and gibbs-gated chains and
a small random-tree ensemble. Writes bench.csv under the output directory.
"""
import os
import sys
import tempfile

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from mapchain.cli import main
from mapchain.io import write_assignment, write_edges, write_nodes
from mapchain.synth import band_plan, column_lean_contest, grid_graph


def run(out_dir: str = "out/bench_large") -> int:
    contest = column_lean_contest(
        100, 100, "E0", [40 + (c % 30) for c in range(100)], noise=5, seed=3
    )
    graph = grid_graph(100, 100, contests=[contest], county_mode="columns",
                       muni_mode="quadrants")
    plan = band_plan(100, 100, 200)
    with tempfile.TemporaryDirectory() as tmp:
        write_nodes(graph, os.path.join(tmp, "nodes.csv"))
        write_edges(graph, os.path.join(tmp, "edges.csv"))
        write_assignment(plan, graph, os.path.join(tmp, "assignment.csv"))
        cfg = os.path.join(tmp, "bench.cfg")
        with open(cfg, "w", encoding="utf-8") as fh:
            fh.write(
                f"nodes = {tmp}/nodes.csv\n"
                f"edges = {tmp}/edges.csv\n"
                f"assignment = {tmp}/assignment.csv\n"
                f"out_dir = {out_dir}\n"
                "pop_tolerance = 0.02\n"
                "seed = 0\n"
                "county_cap = 10000\n"
                "muni_cap = 10000\n"
                "gibbs_weight_county = 0.01\n"
                "bench_iterations = 1000\n"
                "bench_tree_plans = 2\n"
            )
        return main(["bench", "--config", cfg])


if __name__ == "__main__":
    raise SystemExit(run(*sys.argv[1:]))
