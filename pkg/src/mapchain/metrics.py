"""Plan-level partisan and compactness metrics.

Two tallying conventions are supported everywhere: the default averages each
metric over the contests in the sample (one value per election, then the
mean), while the "vote index" convention first sums each precinct's votes
across the sample and computes metrics once on the summed contest. The index
convention overweights high-turnout contests and interacts badly with
nonlinear metrics; both are reported so they can be compared.

Sign conventions: shares are two-party Democratic; efficiency gap and
mean-median are positive for pro-Republican advantage.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from . import errors
from .constraints import split_report
from .graph import Contest, Plan, PrecinctGraph, district_perimeter_area


@dataclass(frozen=True)
class MetricsConfig:
    """Contest sample and smoothing width for fractional seats."""

    contests: tuple
    fractional_sigma: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "contests", tuple(self.contests))
        if not self.contests:
            raise errors.ConfigError("contest sample must be nonempty")
        if not 0.0 < self.fractional_sigma < 0.5:
            raise errors.ConfigError(
                f"fractional_sigma must lie in (0, 0.5), got {self.fractional_sigma}"
            )


@dataclass(frozen=True)
class MetricsReport:
    """Every plan-level metric for one plan.

    ``*_index`` fields are computed on the summed vote-index contest;
    the others average per-contest values over the sample.
    """

    seats_avg: float
    seats_fractional: float
    seats_index: float
    efficiency_gap: float
    mean_median: float
    efficiency_gap_index: float
    mean_median_index: float
    polsby_popper: float
    county_splits: int
    muni_splits: int
    per_district_county_penalty: int
    pieces_count: int
    tie_districts: int = 0

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


# trace.csv column -> MetricsReport field (order is the trace column order)
TRACE_METRIC_FIELDS = (
    ("seats_avg", "seats_avg"),
    ("seats_frac", "seats_fractional"),
    ("seats_index", "seats_index"),
    ("eg", "efficiency_gap"),
    ("mm", "mean_median"),
    ("eg_index", "efficiency_gap_index"),
    ("mm_index", "mean_median_index"),
    ("pp", "polsby_popper"),
    ("county_splits", "county_splits"),
    ("muni_splits", "muni_splits"),
)


def _resolve_contest(graph: PrecinctGraph, contest) -> Contest:
    if isinstance(contest, Contest):
        return contest
    return graph.elections.get(contest)


def district_votes(graph: PrecinctGraph, plan: Plan, contest):
    """Per-district ``(dem, rep)`` two-party vote totals."""
    c = _resolve_contest(graph, contest)
    dem = np.bincount(plan.assignment, weights=c.dem, minlength=plan.k)
    rep = np.bincount(plan.assignment, weights=c.rep, minlength=plan.k)
    return dem, rep


def district_shares(graph: PrecinctGraph, plan: Plan, contest) -> np.ndarray:
    """Per-district Democratic two-party voteshare for one contest."""
    c = _resolve_contest(graph, contest)
    dem, rep = district_votes(graph, plan, c)
    total = dem + rep
    if (total == 0).any():
        d = int(np.flatnonzero(total == 0)[0])
        raise errors.ZeroVotesDistrict(d, c.name)
    return dem / total


def count_ties(shares) -> int:
    """Number of districts with share exactly 0.5."""
    return int((np.asarray(shares) == 0.5).sum())


def seats_won(shares) -> float:
    """Democratic seats: share > 0.5 wins outright, exact ties count 0.5."""
    s = np.asarray(shares, dtype=np.float64)
    return float((s > 0.5).sum()) + 0.5 * count_ties(s)


def normal_cdf(x: float) -> float:
    """Standard normal CDF via erf; accurate to ~1e-15."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def seats_fractional(shares, sigma: float = 0.05) -> float:
    """Expected seats under normal smoothing of shares around 0.5.

    A district at exactly 50% contributes 0.5 seats; as sigma -> 0 this
    approaches the outright seat count (ties kept at 0.5). fsum keeps the
    result independent of district ordering.
    """
    return math.fsum(normal_cdf((float(s) - 0.5) / sigma) for s in np.asarray(shares))


def wasted_votes(dem, rep):
    """Per-district wasted votes ``(dem_wasted, rep_wasted)``.

    The loser wastes every vote; the winner wastes votes beyond half the
    district total. At an exact tie each side wastes votes - total/2 = 0.
    """
    dem = np.asarray(dem, dtype=np.float64)
    rep = np.asarray(rep, dtype=np.float64)
    total = dem + rep
    dem_wasted = np.where(dem >= rep, dem - total / 2.0, dem)
    rep_wasted = np.where(rep >= dem, rep - total / 2.0, rep)
    return dem_wasted, rep_wasted


def efficiency_gap_from_votes(dem, rep) -> float:
    """(Dem wasted - Rep wasted) / total votes; positive is pro-Republican.

    Sums are exactly rounded (fsum) so the result cannot depend on district
    ordering.
    """
    dem = np.asarray(dem, dtype=np.float64)
    rep = np.asarray(rep, dtype=np.float64)
    total = dem + rep
    if (total == 0).any():
        d = int(np.flatnonzero(total == 0)[0])
        raise errors.ZeroVotesDistrict(d, "<votes>")
    dem_wasted, rep_wasted = wasted_votes(dem, rep)
    return (math.fsum(dem_wasted) - math.fsum(rep_wasted)) / math.fsum(total)


def efficiency_gap(graph: PrecinctGraph, plan: Plan, contest) -> float:
    """Efficiency gap of one contest; positive favors Republicans."""
    c = _resolve_contest(graph, contest)
    dem, rep = district_votes(graph, plan, c)
    total = dem + rep
    if (total == 0).any():
        d = int(np.flatnonzero(total == 0)[0])
        raise errors.ZeroVotesDistrict(d, c.name)
    return efficiency_gap_from_votes(dem, rep)


def mean_median(shares) -> float:
    """Mean minus median of district Democratic shares.

    Positive when Democratic voters are packed (median below mean), i.e.
    pro-Republican, matching the efficiency gap orientation.
    """
    s = np.asarray(shares, dtype=np.float64)
    return math.fsum(s) / s.size - float(np.median(s))


def polsby_popper(graph: PrecinctGraph, plan: Plan) -> float:
    """Unweighted district mean of 4*pi*area/perimeter^2."""
    perims, areas = district_perimeter_area(graph, plan)
    return math.fsum(4.0 * math.pi * areas / (perims * perims)) / plan.k


def vote_index(graph: PrecinctGraph, contest_sample) -> Contest:
    """Synthetic contest with per-precinct votes summed across the sample."""
    contests = [_resolve_contest(graph, c) for c in contest_sample]
    if not contests:
        raise errors.ConfigError("vote_index needs a nonempty contest sample")
    dem = np.sum([c.dem for c in contests], axis=0, dtype=np.int64)
    rep = np.sum([c.rep for c in contests], axis=0, dtype=np.int64)
    name = "index(" + "+".join(c.name for c in contests) + ")"
    return Contest(name=name, dem=dem, rep=rep)


def score_plan(graph: PrecinctGraph, plan: Plan, config: MetricsConfig) -> MetricsReport:
    """All metrics for one plan under both tallying conventions."""
    contests = [graph.elections.get(name) for name in config.contests]
    seats = []
    frac = []
    egs = []
    mms = []
    ties = 0
    for c in contests:
        shares = district_shares(graph, plan, c)
        seats.append(seats_won(shares))
        frac.append(seats_fractional(shares, config.fractional_sigma))
        egs.append(efficiency_gap(graph, plan, c))
        mms.append(mean_median(shares))
        ties += count_ties(shares)

    index = vote_index(graph, contests)
    index_shares = district_shares(graph, plan, index)
    ties += count_ties(index_shares)

    splits = split_report(graph, plan)
    return MetricsReport(
        seats_avg=math.fsum(seats) / len(seats),
        seats_fractional=math.fsum(frac) / len(frac),
        seats_index=seats_won(index_shares),
        efficiency_gap=math.fsum(egs) / len(egs),
        mean_median=math.fsum(mms) / len(mms),
        efficiency_gap_index=efficiency_gap(graph, plan, index),
        mean_median_index=mean_median(index_shares),
        polsby_popper=polsby_popper(graph, plan),
        county_splits=splits.county_splits,
        muni_splits=splits.muni_splits,
        per_district_county_penalty=splits.per_district_county_penalty,
        pieces_count=splits.pieces_count,
        tie_districts=ties,
    )
