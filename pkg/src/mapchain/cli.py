"""Operator CLI: chain | tree | score | sweep | bench | enumerate.

Every command takes ``--config FILE`` (flat key=value, keys matching
RunConfig fields) plus repeatable ``--set key=value`` overrides; flags win
over the file. Exit codes: 0 success, 2 config error, 3 data error,
4 runtime error. The rng is numpy's default PCG64, so identical configs
produce identical output files.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import errors
from .chain import ChainTrace, TraceEntry, run_chain, tree_ensemble
from .constraints import ConstraintGate
from .diagnostics import autocorrelation, estimate_burn_in, burn_thin, SweepConfig, constraint_sweep
from .io import (
    RunConfig,
    read_assignment,
    read_config,
    read_graph,
    write_acf_csv,
    write_assignment,
    write_histogram_svg,
    write_summary,
    write_sweep_csv,
    write_sweep_svg,
    write_trace,
)
from .metrics import MetricsConfig, score_plan
from .oracle import enumerate_partitions

_DATA_ERRORS = (
    errors.IngestError,
    errors.DuplicatePrecinctId,
    errors.DanglingEdge,
    errors.DuplicateEdge,
    errors.InvalidEdge,
    errors.InvalidNodeData,
    errors.MissingVoteColumn,
    errors.DuplicateContest,
    errors.DisconnectedGraph,
    errors.DisconnectedSubset,
    errors.NegativePerimeter,
    errors.UnknownContest,
    errors.ZeroVotesDistrict,
    errors.InvalidSeedPlan,
    errors.TooLarge,
    FileNotFoundError,
)


def _gate_from_config(cfg: RunConfig) -> ConstraintGate:
    if cfg.mode == "permissive":
        return ConstraintGate.permissive()
    if cfg.mode == "reject":
        return ConstraintGate.reject(cfg.county_cap, cfg.muni_cap)
    weights = {}
    if cfg.gibbs_weight_county:
        weights["county_splits"] = cfg.gibbs_weight_county
    if cfg.gibbs_weight_muni:
        weights["muni_splits"] = cfg.gibbs_weight_muni
    if cfg.gibbs_weight_district_county:
        weights["per_district_county_penalty"] = cfg.gibbs_weight_district_county
    return ConstraintGate.gibbs(weights)


def _require(cfg: RunConfig, *keys) -> None:
    for key in keys:
        if not getattr(cfg, key):
            raise errors.ConfigError(f"config key {key!r} is required for this command")


def _load(cfg: RunConfig):
    _require(cfg, "nodes", "edges")
    graph = read_graph(cfg.nodes, cfg.edges)
    contests = cfg.validate_contests(graph)
    mcfg = MetricsConfig(contests, cfg.fractional_sigma)
    return graph, mcfg


def _chain_job(args):
    graph, plan, cfg_tuple, seed_entropy, mcfg = args
    steps, tolerance, gate, retries, tree_method, pair_selection = cfg_tuple
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed_entropy))
    return run_chain(
        graph, plan, steps, tolerance, gate, mcfg, rng,
        max_tree_retries=retries, tree_method=tree_method,
        pair_selection=pair_selection,
    )


def _run_chains(graph, plan, cfg: RunConfig, gate, mcfg):
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_chains)
    cfg_tuple = (
        cfg.steps, cfg.pop_tolerance, gate, cfg.max_tree_retries,
        cfg.tree_method, cfg.pair_selection,
    )
    jobs = [(graph, plan, cfg_tuple, s.entropy, mcfg) for s in seeds]
    workers = min(cfg.workers, cfg.n_chains)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_chain_job, jobs))
    return [_chain_job(job) for job in jobs]


def _concat_post_burn(traces, burn: int, thin: int) -> ChainTrace:
    combined = ChainTrace()
    for trace in traces:
        kept = burn_thin(trace, burn, thin)
        for entry in kept.entries:
            combined.entries.append(
                TraceEntry(step=len(combined.entries), accepted=entry.accepted,
                           report=entry.report)
            )
        combined.proposed += trace.proposed
        combined.accepted += trace.accepted
        combined.rejected_by_constraint += trace.rejected_by_constraint
        combined.rejected_no_cut += trace.rejected_no_cut
    return combined


def _write_ensemble_outputs(cfg, combined, raw_trace, reference, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    trace_path = os.path.join(out_dir, "trace.csv")
    write_trace(combined, trace_path)
    write_summary(combined, os.path.join(out_dir, "summary.csv"))
    series = raw_trace.series("seats_avg")
    max_lag = min(cfg.acf_max_lag, series.size - 2)
    if max_lag >= 1:
        try:
            acf = autocorrelation(series, max_lag)
            write_acf_csv(acf, os.path.join(out_dir, "acf.csv"))
        except errors.ZeroVariance:
            print("note: seats_avg series is constant; skipping acf.csv")
    for metric, column in (("seats_avg", "seats_avg"), ("seats_index", "seats_index")):
        write_histogram_svg(
            combined.series(metric),
            cfg.hist_bins,
            os.path.join(out_dir, f"hist_{column}.svg"),
            reference_line=getattr(reference, metric) if reference else None,
        )
    return trace_path


def _print_acceptance(trace: ChainTrace) -> None:
    print(
        f"proposed={trace.proposed} accepted={trace.accepted} "
        f"rejected_by_constraint={trace.rejected_by_constraint} "
        f"rejected_no_cut={trace.rejected_no_cut}"
    )


def cmd_chain(cfg: RunConfig) -> int:
    graph, mcfg = _load(cfg)
    _require(cfg, "assignment")
    plan, _ = read_assignment(cfg.assignment, graph)
    gate = _gate_from_config(cfg)
    traces = _run_chains(graph, plan, cfg, gate, mcfg)
    burn = cfg.burn_in if cfg.burn_in >= 0 else estimate_burn_in(traces[0])
    combined = _concat_post_burn(traces, burn, cfg.thinning)
    reference = score_plan(graph, plan, mcfg)
    trace_path = _write_ensemble_outputs(cfg, combined, traces[0], reference, cfg.out_dir)
    print(f"chains={cfg.n_chains} steps={cfg.steps} burn_in={burn} thinning={cfg.thinning}")
    _print_acceptance(combined)
    print(f"wrote {trace_path}")
    return 0


def cmd_tree(cfg: RunConfig) -> int:
    graph, mcfg = _load(cfg)
    reference = None
    if cfg.districts > 0:
        k = cfg.districts
    else:
        _require(cfg, "assignment")
        plan, _ = read_assignment(cfg.assignment, graph)
        k = plan.k
        reference = score_plan(graph, plan, mcfg)
    rng = np.random.default_rng(cfg.seed)
    trace = tree_ensemble(
        graph, k, cfg.pop_tolerance, cfg.n_plans, mcfg, rng,
        retry_budget=cfg.max_tree_retries, global_retry_cap=cfg.tree_retry_cap,
        tree_method=cfg.tree_method,
    )
    trace_path = _write_ensemble_outputs(cfg, trace, trace, reference, cfg.out_dir)
    print(f"plans={cfg.n_plans} k={k} failed_draws={trace.rejected_no_cut}")
    print(f"wrote {trace_path}")
    return 0


def cmd_score(cfg: RunConfig, assignment=None) -> int:
    graph, mcfg = _load(cfg)
    path = assignment or cfg.assignment
    if not path:
        raise errors.ConfigError("score needs an assignment file")
    plan, _ = read_assignment(path, graph)
    report = score_plan(graph, plan, mcfg)
    for key, value in report.as_dict().items():
        print(f"{key} = {value}")
    os.makedirs(cfg.out_dir, exist_ok=True)
    out = os.path.join(cfg.out_dir, "report.csv")
    items = list(report.as_dict().items())
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(",".join(key for key, _ in items) + "\n")
        fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for _, v in items) + "\n")
    print(f"wrote {out}")
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    graph, mcfg = _load(cfg)
    _require(cfg, "assignment")
    if len(set(cfg.sweep_caps)) < 2:
        raise errors.ConfigError("sweep_caps needs at least 2 distinct caps")
    plan, _ = read_assignment(cfg.assignment, graph)
    rng = np.random.default_rng(cfg.seed)
    baseline_trace = tree_ensemble(
        graph, plan.k, cfg.pop_tolerance, cfg.n_plans, mcfg, rng,
        retry_budget=cfg.max_tree_retries, global_retry_cap=cfg.tree_retry_cap,
        tree_method=cfg.tree_method,
    )
    baseline = float(np.mean(baseline_trace.series(cfg.sweep_metric)))
    sweep_cfg = SweepConfig(
        steps=cfg.steps,
        tolerance=cfg.pop_tolerance,
        metrics_config=mcfg,
        metric=cfg.sweep_metric,
        burn=cfg.burn_in if cfg.burn_in >= 0 else cfg.steps // 5,
        thin=cfg.thinning,
        replicates=cfg.sweep_replicates,
        seed=cfg.seed,
        muni_cap=cfg.muni_cap if cfg.muni_cap > 0 else 10**9,
        max_tree_retries=cfg.max_tree_retries,
        tree_method=cfg.tree_method,
        pair_selection=cfg.pair_selection,
    )
    extrapolate = None
    if cfg.sweep_extrapolate_cap == cfg.sweep_extrapolate_cap:  # not NaN
        extrapolate = cfg.sweep_extrapolate_cap
    result = constraint_sweep(graph, plan, cfg.sweep_caps, sweep_cfg,
                              baseline=baseline, extrapolate_at=extrapolate)
    os.makedirs(cfg.out_dir, exist_ok=True)
    write_sweep_csv(result, os.path.join(cfg.out_dir, "sweep.csv"))
    write_sweep_svg(result, os.path.join(cfg.out_dir, "sweep.svg"))
    print(
        f"fit: slope={result.fit_slope:.6g} intercept={result.fit_intercept:.6g} "
        f"value@{result.extrapolated_at:g}={result.extrapolated_value:.6g} "
        f"tree_baseline={baseline:.6g}"
    )
    print(f"wrote {os.path.join(cfg.out_dir, 'sweep.csv')}")
    return 0


@dataclass
class BenchReport:
    read_in_sec: float
    rows: list  # (configuration, iterations, seconds)


def run_bench(cfg: RunConfig) -> BenchReport:
    t0 = time.perf_counter()
    graph, mcfg = _load(cfg)
    _require(cfg, "assignment")
    plan, _ = read_assignment(cfg.assignment, graph)
    read_in = time.perf_counter() - t0

    def timed_chain(name, gate):
        rng = np.random.default_rng(cfg.seed)
        t = time.perf_counter()
        run_chain(
            graph, plan, cfg.bench_iterations, cfg.pop_tolerance, gate, mcfg, rng,
            max_tree_retries=cfg.max_tree_retries, tree_method=cfg.tree_method,
            pair_selection=cfg.pair_selection,
        )
        return (name, cfg.bench_iterations, time.perf_counter() - t)

    rows = [
        timed_chain("chain_unconstrained", ConstraintGate.permissive()),
        timed_chain("chain_reject", ConstraintGate.reject(cfg.county_cap, cfg.muni_cap)),
        timed_chain(
            "chain_gibbs",
            ConstraintGate.gibbs(
                {
                    "county_splits": cfg.gibbs_weight_county,
                    "muni_splits": cfg.gibbs_weight_muni,
                    "per_district_county_penalty": cfg.gibbs_weight_district_county,
                }
            ),
        ),
    ]
    rng = np.random.default_rng(cfg.seed)
    t = time.perf_counter()
    tree_ensemble(
        graph, plan.k, cfg.pop_tolerance, cfg.bench_tree_plans, mcfg, rng,
        retry_budget=cfg.max_tree_retries, global_retry_cap=cfg.tree_retry_cap,
        tree_method=cfg.tree_method,
    )
    rows.append(("random_tree", cfg.bench_tree_plans, time.perf_counter() - t))
    return BenchReport(read_in_sec=read_in, rows=rows)


def cmd_bench(cfg: RunConfig) -> int:
    report = run_bench(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    out = os.path.join(cfg.out_dir, "bench.csv")
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("configuration,read_in_sec,iterations,seconds\n")
        for i, (name, iterations, seconds) in enumerate(report.rows):
            read_in = f"{report.read_in_sec:.4f}" if i == 0 else ""
            fh.write(f"{name},{read_in},{iterations},{seconds:.4f}\n")
    for name, iterations, seconds in report.rows:
        print(f"{name}: {iterations} iterations in {seconds:.3f}s")
    print(f"read-in: {report.read_in_sec:.3f}s")
    print(f"wrote {out}")
    return 0


def cmd_enumerate(cfg: RunConfig) -> int:
    graph, _ = _load(cfg)
    if cfg.districts > 0:
        k = cfg.districts
    else:
        _require(cfg, "assignment")
        plan, _ = read_assignment(cfg.assignment, graph)
        k = plan.k
    tolerance = cfg.pop_tolerance
    catalog = enumerate_partitions(graph, k, tolerance)
    os.makedirs(cfg.out_dir, exist_ok=True)
    for i, plan in enumerate(catalog.plans):
        write_assignment(plan, graph, os.path.join(cfg.out_dir, f"catalog_{i:04d}.csv"))
    print(f"catalog size: {len(catalog)} (k={k}, tolerance={tolerance:g})")
    return 0


def _parse_overrides(pairs) -> dict:
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise errors.ConfigError(f"--set expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        overrides[key.strip()] = value.strip()
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mapchain",
        description="District-plan ensembles over precinct graphs: "
        "recombination chains, random-tree baselines, fairness metrics, "
        "and mixing diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("chain", "run recombination chains and write trace/summary/histograms"),
        ("tree", "run an independent random-tree ensemble"),
        ("score", "score a single plan file"),
        ("sweep", "constraint-relaxation sweep with linear extrapolation"),
        ("bench", "time read-in and sampling configurations"),
        ("enumerate", "exhaustively enumerate valid partitions (tiny graphs)"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="key=value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable; flags win)")
        if name == "score":
            p.add_argument("--assignment", help="plan file to score "
                           "(falls back to the config's assignment)")
    return parser


_COMMANDS = {
    "chain": cmd_chain,
    "tree": cmd_tree,
    "sweep": cmd_sweep,
    "bench": cmd_bench,
    "enumerate": cmd_enumerate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = read_config(args.config, overrides=_parse_overrides(args.set))
        if args.command == "score":
            return cmd_score(cfg, assignment=getattr(args, "assignment", None))
        return _COMMANDS[args.command](cfg)
    except errors.ConfigError as e:
        print(f"ERROR ConfigError: {e}", file=sys.stderr)
        return 2
    except _DATA_ERRORS as e:
        print(f"ERROR {type(e).__name__}: {e}", file=sys.stderr)
        return 3
    except (errors.MapchainError, OSError) as e:
        print(f"ERROR {type(e).__name__}: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
