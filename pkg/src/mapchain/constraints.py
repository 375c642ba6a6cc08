"""Administrative boundary split counting and proposal acceptance gates.

A county or municipality is "split" when it intersects two or more
districts. Two counting conventions circulate in redistricting tooling, so
both are exposed: ``splits`` (units touching >= 2 districts) and the
pieces-minus-units excess (total district/unit incidence pieces with the
unit count subtracted). They agree only while no unit touches 3+ districts.

Gates decide proposal acceptance. ``reject`` applies hard caps to the
proposal alone (memoryless); ``gibbs`` accepts with probability
``min(1, exp(-sum_j w_j * (penalty_j(proposal) - penalty_j(current))))``,
the usual Metropolis energy factor; ``permissive`` accepts everything.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Plan, PrecinctGraph

UNITS = ("county", "municipality")

GIBBS_TERMS = ("county_splits", "muni_splits", "per_district_county_penalty")


@dataclass(frozen=True)
class SplitReport:
    """Split counts for one plan."""

    county_splits: int
    muni_splits: int
    per_district_county_penalty: int
    pieces_count: int  # county/district incidence pieces (redistmetrics-style)


def _unit_codes(graph: PrecinctGraph, unit: str):
    if unit == "county":
        return graph.county_codes, graph.n_counties
    if unit == "municipality":
        return graph.muni_codes, graph.n_munis
    raise ValueError(f"unknown unit {unit!r}; use one of {UNITS}")


def _district_counts_per_unit(graph: PrecinctGraph, plan: Plan, unit: str):
    codes, n_units = _unit_codes(graph, unit)
    key = codes * plan.k + plan.assignment
    uniq = np.unique(key)
    counts = np.bincount(uniq // plan.k, minlength=n_units)
    return counts, n_units


def count_splits(graph: PrecinctGraph, plan: Plan, unit: str):
    """``(splits, pieces)`` for the given unit type.

    ``splits`` is the number of units intersecting >= 2 districts; ``pieces``
    is the total number of distinct (unit, district) incidences. The
    pieces-excess convention is ``pieces - unit_count``
    (see :func:`pieces_excess`).
    """
    counts, _ = _district_counts_per_unit(graph, plan, unit)
    splits = int((counts >= 2).sum())
    pieces = int(counts.sum())
    return splits, pieces


def pieces_excess(graph: PrecinctGraph, plan: Plan, unit: str) -> int:
    """Pieces count minus the number of units (the redistmetrics-style count)."""
    splits, pieces = count_splits(graph, plan, unit)
    _, n_units = _unit_codes(graph, unit)
    return pieces - n_units


def per_district_split_penalty(graph: PrecinctGraph, plan: Plan, unit: str = "county") -> int:
    """Sum over districts of the number of split units the district touches.

    Equals the sum over split units of the number of districts touching
    them, hence always >= 2 * splits, with equality iff every split unit
    touches exactly two districts.
    """
    counts, _ = _district_counts_per_unit(graph, plan, unit)
    return int(counts[counts >= 2].sum())


def split_report(graph: PrecinctGraph, plan: Plan) -> SplitReport:
    county_splits, county_pieces = count_splits(graph, plan, "county")
    muni_splits, _ = count_splits(graph, plan, "municipality")
    return SplitReport(
        county_splits=county_splits,
        muni_splits=muni_splits,
        per_district_county_penalty=per_district_split_penalty(graph, plan, "county"),
        pieces_count=county_pieces,
    )


@dataclass(frozen=True)
class ConstraintGate:
    """Acceptance rule applied to each proposal; see module docstring."""

    mode: str = "permissive"  # permissive | reject | gibbs
    county_cap: int = 0
    muni_cap: int = 0
    weights: tuple = ()  # ((SplitReport field, weight), ...)

    def __post_init__(self):
        if self.mode not in ("permissive", "reject", "gibbs"):
            raise ValueError(f"unknown gate mode {self.mode!r}")
        if self.county_cap < 0 or self.muni_cap < 0:
            raise ValueError("caps must be >= 0")
        for term, weight in self.weights:
            if term not in GIBBS_TERMS:
                raise ValueError(f"unknown penalty term {term!r}; use {GIBBS_TERMS}")
            if weight < 0:
                raise ValueError(f"weight for {term!r} must be >= 0")

    @classmethod
    def permissive(cls) -> "ConstraintGate":
        return cls(mode="permissive")

    @classmethod
    def reject(cls, county_cap: int, muni_cap: int) -> "ConstraintGate":
        return cls(mode="reject", county_cap=int(county_cap), muni_cap=int(muni_cap))

    @classmethod
    def gibbs(cls, weights) -> "ConstraintGate":
        """``weights`` maps SplitReport field names to nonnegative reals."""
        items = tuple(sorted((str(k), float(v)) for k, v in dict(weights).items()))
        return cls(mode="gibbs", weights=items)


def gate_accept(
    gate: ConstraintGate,
    current: SplitReport,
    proposal: SplitReport,
    rng: np.random.Generator,
) -> bool:
    """Accept/reject decision; deterministic given the rng state.

    Gibbs mode consumes a random draw only when the penalty delta is
    positive, so an all-zero-weight gibbs gate makes the same seeded
    decisions as a permissive gate.
    """
    if gate.mode == "permissive":
        return True
    if gate.mode == "reject":
        return (
            proposal.county_splits <= gate.county_cap
            and proposal.muni_splits <= gate.muni_cap
        )
    delta = 0.0
    for term, weight in gate.weights:
        delta += weight * (getattr(proposal, term) - getattr(current, term))
    if delta <= 0.0:
        return True
    return float(rng.random()) < math.exp(-delta)
