"""Ensemble generators: recombination Markov chain and random-tree plans.

A recombination step merges a uniformly chosen pair of adjacent districts,
draws a spanning tree over the union, and re-splits it at a balanced cut;
every other district is untouched. Rejected steps (no balanced cut, or the
constraint gate refuses the proposal) repeat the current plan in the trace,
standard Metropolis-style accounting, so downstream statistics see a
well-defined stationary sequence.

The random-tree generator builds whole plans ab initio by recursive
balanced bipartition; its plans are mutually independent given independent
rng streams, which makes it the natural mixing baseline for the chain.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import errors
from .constraints import ConstraintGate, SplitReport, gate_accept, split_report
from .graph import Plan, PrecinctGraph, district_populations, is_contiguous
from .metrics import MetricsConfig, MetricsReport, score_plan
from .trees import bipartition_region

PAIR_SELECTION = ("uniform", "edges")


@dataclass
class ChainState:
    """Mutable state of one recombination chain."""

    plan: Plan
    rng: np.random.Generator
    step: int = 0
    proposed: int = 0
    accepted: int = 0
    rejected_by_constraint: int = 0
    rejected_no_cut: int = 0
    _current_splits: "SplitReport | None" = None

    def counters_consistent(self) -> bool:
        return self.proposed == (
            self.accepted + self.rejected_by_constraint + self.rejected_no_cut
        )


@dataclass(frozen=True)
class TraceEntry:
    step: int
    accepted: bool
    report: MetricsReport


@dataclass
class ChainTrace:
    """Ordered per-step metric reports plus acceptance bookkeeping."""

    entries: list = field(default_factory=list)
    proposed: int = 0
    accepted: int = 0
    rejected_by_constraint: int = 0
    rejected_no_cut: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    def series(self, metric: str) -> np.ndarray:
        """Metric values per step; ``metric`` is a MetricsReport field name."""
        return np.array(
            [getattr(e.report, metric) for e in self.entries], dtype=np.float64
        )

    def accept_flags(self) -> np.ndarray:
        return np.array([e.accepted for e in self.entries], dtype=bool)


def adjacent_district_pairs(graph: PrecinctGraph, plan: Plan) -> np.ndarray:
    """Unordered district pairs sharing at least one graph edge, sorted."""
    a = plan.assignment[graph.edge_a]
    b = plan.assignment[graph.edge_b]
    cross = a != b
    if not cross.any():
        return np.empty((0, 2), dtype=np.int64)
    lo = np.minimum(a[cross], b[cross])
    hi = np.maximum(a[cross], b[cross])
    keys = np.unique(lo * plan.k + hi)
    return np.stack([keys // plan.k, keys % plan.k], axis=1)


def recom_step(
    state: ChainState,
    graph: PrecinctGraph,
    tolerance: float,
    constraint_gate: ConstraintGate,
    max_tree_retries: int = 50,
    tree_method: str = "uniform",
    pair_selection: str = "uniform",
) -> ChainState:
    """Advance the chain by one step (the plan may repeat).

    The merged pair is re-split against equal targets of ``ideal = total/k``
    each, so accepted plans always stay within ``tolerance`` of the ideal
    district population regardless of chain length.
    """
    plan = state.plan
    rng = state.rng
    state.step += 1
    state.proposed += 1

    if pair_selection == "uniform":
        pairs = adjacent_district_pairs(graph, plan)
        if pairs.shape[0] == 0:
            raise errors.NoAdjacentDistrictPair(f"plan with k={plan.k} has no adjacent pair")
        d1, d2 = pairs[int(rng.integers(pairs.shape[0]))]
    elif pair_selection == "edges":
        a = plan.assignment[graph.edge_a]
        b = plan.assignment[graph.edge_b]
        cross = np.flatnonzero(a != b)
        if cross.size == 0:
            raise errors.NoAdjacentDistrictPair(f"plan with k={plan.k} has no adjacent pair")
        e = int(cross[int(rng.integers(cross.size))])
        d1, d2 = int(a[e]), int(b[e])
    else:
        raise ValueError(f"unknown pair_selection {pair_selection!r}; use {PAIR_SELECTION}")

    subset = np.flatnonzero(
        (plan.assignment == d1) | (plan.assignment == d2)
    )
    ideal = graph.total_population / plan.k
    parts = bipartition_region(
        graph,
        subset,
        (ideal, ideal),
        tolerance,
        rng,
        max_tree_retries=max_tree_retries,
        method=tree_method,
    )
    if parts is None:
        state.rejected_no_cut += 1
        return state

    assignment = plan.assignment.copy()
    assignment[parts[0]] = d1
    assignment[parts[1]] = d2
    proposal = Plan(assignment, plan.k)

    if constraint_gate.mode == "permissive":
        state.plan = proposal
        state.accepted += 1
        return state

    if state._current_splits is None:
        state._current_splits = split_report(graph, plan)
    proposal_splits = split_report(graph, proposal)
    if gate_accept(constraint_gate, state._current_splits, proposal_splits, rng):
        state.plan = proposal
        state._current_splits = proposal_splits
        state.accepted += 1
    else:
        state.rejected_by_constraint += 1
    return state


def check_seed_plan(
    graph: PrecinctGraph,
    plan: Plan,
    tolerance: float,
    constraint_gate: ConstraintGate,
    rng: np.random.Generator,
) -> None:
    """Raise InvalidSeedPlan naming the first failed chain precondition."""
    if plan.n != graph.n:
        raise errors.InvalidSeedPlan(
            f"coverage: plan has {plan.n} nodes, graph has {graph.n}"
        )
    flags = is_contiguous(graph, plan)
    if not all(flags):
        bad = [d for d, ok in enumerate(flags) if not ok]
        raise errors.InvalidSeedPlan(f"contiguity: districts {bad} are disconnected")
    ideal = graph.total_population / plan.k
    pops = district_populations(graph, plan)
    dev = np.abs(pops - ideal)
    if (dev > tolerance * ideal).any():
        bad = np.flatnonzero(dev > tolerance * ideal).tolist()
        raise errors.InvalidSeedPlan(
            f"population balance: districts {bad} deviate more than "
            f"{tolerance:g} from ideal {ideal:g}"
        )
    seed_splits = split_report(graph, plan)
    if not gate_accept(constraint_gate, seed_splits, seed_splits, rng):
        raise errors.InvalidSeedPlan(
            f"constraint gate: seed plan violates the gate "
            f"(county_splits={seed_splits.county_splits}, "
            f"muni_splits={seed_splits.muni_splits})"
        )


def run_chain(
    graph: PrecinctGraph,
    seed_plan: Plan,
    steps: int,
    tolerance: float,
    constraint_gate: ConstraintGate,
    metrics_config: MetricsConfig,
    rng: np.random.Generator,
    max_tree_retries: int = 50,
    tree_method: str = "uniform",
    pair_selection: str = "uniform",
    validate_every: int = 101,
) -> ChainTrace:
    """Run a recombination chain and score every step.

    The trace has exactly ``steps`` entries (steps=0 gives an empty trace);
    rejected steps repeat the current plan. Contiguity and balance are
    re-checked every ``validate_every`` steps (plans are valid by
    construction; this is a sampled belt-and-braces assertion — set 1 for
    every step, 0 to disable). Deterministic given the rng seed.
    """
    check_seed_plan(graph, seed_plan, tolerance, constraint_gate, rng)
    state = ChainState(plan=seed_plan, rng=rng)
    trace = ChainTrace()
    for t in range(steps):
        before = state.accepted
        recom_step(
            state,
            graph,
            tolerance,
            constraint_gate,
            max_tree_retries=max_tree_retries,
            tree_method=tree_method,
            pair_selection=pair_selection,
        )
        report = score_plan(graph, state.plan, metrics_config)
        trace.entries.append(
            TraceEntry(step=t, accepted=state.accepted > before, report=report)
        )
        if validate_every and (t + 1) % validate_every == 0:
            assert all(is_contiguous(graph, state.plan)), "chain produced a split district"
            ideal = graph.total_population / state.plan.k
            pops = district_populations(graph, state.plan)
            assert (np.abs(pops - ideal) <= tolerance * ideal + 1e-9).all(), (
                "chain left the population window"
            )
    trace.proposed = state.proposed
    trace.accepted = state.accepted
    trace.rejected_by_constraint = state.rejected_by_constraint
    trace.rejected_no_cut = state.rejected_no_cut
    return trace


def random_tree_plan(
    graph: PrecinctGraph,
    k: int,
    tolerance: float,
    rng: np.random.Generator,
    retry_budget: int = 50,
    tree_method: str = "uniform",
):
    """One whole plan by recursive balanced bipartition, or None on failure.

    Each stage splits a region into halves targeted to carry ceil(k'/2) and
    floor(k'/2) districts with proportional populations; recursion stops at
    single-district regions. Absence (a stage exhausting ``retry_budget``)
    is a value, not an error; callers retry or report.
    """
    if not 1 <= k <= graph.n:
        raise ValueError(f"k must lie in 1..{graph.n}, got {k}")
    labels = np.full(graph.n, -1, dtype=np.int64)
    next_label = 0

    def rec(region: np.ndarray, kk: int) -> bool:
        nonlocal next_label
        if kk == 1:
            labels[region] = next_label
            next_label += 1
            return True
        k1 = (kk + 1) // 2
        k2 = kk // 2
        pop = int(graph.populations[region].sum())
        targets = (pop * k1 / kk, pop * k2 / kk)
        parts = bipartition_region(
            graph,
            region,
            targets,
            tolerance,
            rng,
            max_tree_retries=retry_budget,
            method=tree_method,
        )
        if parts is None:
            return False
        return rec(parts[0], k1) and rec(parts[1], k2)

    if rec(np.arange(graph.n, dtype=np.int64), k):
        return Plan(labels, k)
    return None


def tree_ensemble(
    graph: PrecinctGraph,
    k: int,
    tolerance: float,
    n_plans: int,
    metrics_config: MetricsConfig,
    rng: np.random.Generator,
    retry_budget: int = 50,
    global_retry_cap: int = 1000,
    tree_method: str = "uniform",
) -> ChainTrace:
    """Score ``n_plans`` independent random-tree plans into a trace.

    Failed draws are retried; more than ``global_retry_cap`` total failures
    raises ``RetryBudgetExhausted``.
    """
    if n_plans < 1:
        raise ValueError("n_plans must be >= 1")
    trace = ChainTrace()
    failures = 0
    while len(trace.entries) < n_plans:
        plan = random_tree_plan(
            graph, k, tolerance, rng, retry_budget=retry_budget, tree_method=tree_method
        )
        if plan is None:
            failures += 1
            if failures > global_retry_cap:
                raise errors.RetryBudgetExhausted(
                    f"{failures} failed tree draws exceeds cap {global_retry_cap}"
                )
            continue
        report = score_plan(graph, plan, metrics_config)
        trace.entries.append(
            TraceEntry(step=len(trace.entries), accepted=True, report=report)
        )
    trace.proposed = n_plans + failures
    trace.accepted = n_plans
    trace.rejected_no_cut = failures
    return trace
