"""Precinct adjacency graph, district plans, and structural queries.

The graph is immutable after construction: nodes carry precomputed geometry
scalars (area, perimeter) and administrative ids, adjacency arrives as an
explicit edge list with shared boundary lengths. No coordinate geometry
anywhere. District labels are dense integers ``0..k-1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import errors


@dataclass(frozen=True)
class PrecinctNode:
    """One precinct: population, admin units, and geometry scalars."""

    precinct_id: str
    population: int
    county_id: str
    muni_id: str
    area: float
    perimeter: float


@dataclass(frozen=True)
class AdjacencyEdge:
    """Undirected adjacency between two precincts.

    Endpoints are node ordinals in a built graph; the ingestion layer may
    construct edges with precinct-id string endpoints and let ``build_graph``
    resolve them.
    """

    a: "int | str"
    b: "int | str"
    shared_perimeter: float = 1.0


@dataclass(frozen=True)
class Contest:
    """Two-party vote counts for one contest, one entry per node ordinal."""

    name: str
    dem: np.ndarray
    rep: np.ndarray


class ElectionSet:
    """Named two-party contests over a fixed node ordering."""

    def __init__(self, contests: Sequence[Contest]):
        self.contests = tuple(contests)
        self._by_name = {c.name: c for c in self.contests}
        if len(self._by_name) != len(self.contests):
            names = [c.name for c in self.contests]
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise errors.DuplicateContest(f"duplicate contest names: {dupes}")

    def names(self) -> tuple:
        return tuple(c.name for c in self.contests)

    def get(self, name: str) -> Contest:
        try:
            return self._by_name[name]
        except KeyError:
            raise errors.UnknownContest(name, self.names()) from None

    def __contains__(self, name) -> bool:
        return name in self._by_name

    def __iter__(self):
        return iter(self.contests)

    def __len__(self) -> int:
        return len(self.contests)


class Plan:
    """Assignment of every node to one of ``k`` districts.

    Labels are dense: every value lies in ``0..k-1`` and every district is
    nonempty. The assignment array is frozen; derive new plans by copying.
    """

    __slots__ = ("assignment", "k")

    def __init__(self, assignment, k: int):
        arr = np.ascontiguousarray(assignment, dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("assignment must be a nonempty 1-d sequence")
        k = int(k)
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        lo, hi = int(arr.min()), int(arr.max())
        if lo < 0 or hi >= k:
            raise ValueError(f"district labels must lie in 0..{k - 1}, saw {lo}..{hi}")
        counts = np.bincount(arr, minlength=k)
        if (counts == 0).any():
            empty = np.flatnonzero(counts == 0).tolist()
            raise ValueError(f"empty districts: {empty}")
        arr.setflags(write=False)
        self.assignment = arr
        self.k = k

    @property
    def n(self) -> int:
        return int(self.assignment.size)

    def district_nodes(self, d: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == d)

    def same_partition(self, other: "Plan") -> bool:
        """True when the two plans induce the same unlabeled partition."""
        return canonical_form(self) == canonical_form(other)

    def __eq__(self, other):
        return (
            isinstance(other, Plan)
            and self.k == other.k
            and np.array_equal(self.assignment, other.assignment)
        )

    def __hash__(self):
        return hash((self.k, self.assignment.tobytes()))

    def __repr__(self):
        return f"Plan(k={self.k}, n={self.n})"


def canonical_form(plan: Plan) -> tuple:
    """Assignment relabeled by order of first appearance in node order.

    Two plans are the same partition iff their canonical forms are equal.
    """
    mapping = np.full(plan.k, -1, dtype=np.int64)
    nxt = 0
    out = np.empty(plan.n, dtype=np.int64)
    for i, lab in enumerate(plan.assignment):
        m = mapping[lab]
        if m < 0:
            mapping[lab] = m = nxt
            nxt += 1
        out[i] = m
    return tuple(out.tolist())


@dataclass(frozen=True, eq=False)
class PrecinctGraph:
    """Connected precinct adjacency graph with votes attached.

    Construct with :func:`build_graph`; all fields, including the numpy
    arrays, are treated as immutable and are safe to share across workers.
    """

    nodes: tuple
    edges: tuple
    node_index: dict
    elections: ElectionSet
    populations: np.ndarray
    areas: np.ndarray
    perimeters: np.ndarray
    county_of: tuple
    muni_of: tuple
    county_codes: np.ndarray
    muni_codes: np.ndarray
    n_counties: int
    n_munis: int
    edge_a: np.ndarray
    edge_b: np.ndarray
    edge_shared: np.ndarray
    neighbors: tuple

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def total_population(self) -> int:
        return int(self.populations.sum())

    def precinct_ids(self) -> tuple:
        return tuple(node.precinct_id for node in self.nodes)

    def __repr__(self):
        return (
            f"PrecinctGraph(n={self.n}, edges={self.n_edges}, "
            f"counties={self.n_counties}, munis={self.n_munis}, "
            f"contests={len(self.elections)})"
        )


def _components(n: int, neighbors: Sequence[np.ndarray]) -> list:
    """Connected components by iterative flood fill over adjacency lists."""
    seen = np.zeros(n, dtype=bool)
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in neighbors[u]:
                v = int(v)
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        comps.append(comp)
    return comps


def build_graph(
    nodes: Sequence[PrecinctNode],
    edges: Iterable[AdjacencyEdge],
    elections: ElectionSet,
) -> PrecinctGraph:
    """Validate inputs and assemble an immutable :class:`PrecinctGraph`.

    Raises :class:`~mapchain.errors.DisconnectedGraph` (listing components),
    ``DuplicatePrecinctId``, ``DanglingEdge``, ``DuplicateEdge``,
    ``InvalidEdge``, ``InvalidNodeData``, or ``MissingVoteColumn``.
    """
    nodes = tuple(nodes)
    if not nodes:
        raise errors.EmptyInput("no nodes")
    n = len(nodes)

    node_index: dict = {}
    for i, node in enumerate(nodes):
        if node.precinct_id in node_index:
            raise errors.DuplicatePrecinctId(
                f"precinct id {node.precinct_id!r} appears more than once"
            )
        node_index[node.precinct_id] = i
        if node.population < 0:
            raise errors.InvalidNodeData(
                f"{node.precinct_id}: population {node.population} < 0"
            )
        if not node.area > 0:
            raise errors.InvalidNodeData(f"{node.precinct_id}: area must be > 0")
        if not node.perimeter > 0:
            raise errors.InvalidNodeData(f"{node.precinct_id}: perimeter must be > 0")

    resolved = []
    seen_pairs = set()
    for edge in edges:
        a, b = edge.a, edge.b
        if isinstance(a, str):
            if a not in node_index:
                raise errors.DanglingEdge(f"edge endpoint {a!r} is not a precinct")
            a = node_index[a]
        if isinstance(b, str):
            if b not in node_index:
                raise errors.DanglingEdge(f"edge endpoint {b!r} is not a precinct")
            b = node_index[b]
        a, b = int(a), int(b)
        if not (0 <= a < n and 0 <= b < n):
            raise errors.DanglingEdge(f"edge ordinal out of range: ({a}, {b})")
        if a == b:
            raise errors.InvalidEdge(f"self-loop at node {a}")
        if edge.shared_perimeter < 0:
            raise errors.InvalidEdge(
                f"edge ({a}, {b}): shared_perimeter {edge.shared_perimeter} < 0"
            )
        if a > b:
            a, b = b, a
        if (a, b) in seen_pairs:
            raise errors.DuplicateEdge(f"duplicate edge for node pair ({a}, {b})")
        seen_pairs.add((a, b))
        resolved.append(AdjacencyEdge(a, b, float(edge.shared_perimeter)))
    resolved.sort(key=lambda e: (e.a, e.b))

    for contest in elections:
        for side, arr in (("D", contest.dem), ("R", contest.rep)):
            arr = np.asarray(arr)
            if arr.shape != (n,):
                raise errors.MissingVoteColumn(
                    f"contest {contest.name!r} side {side}: expected {n} vote "
                    f"entries, got {arr.shape}"
                )
            if (arr < 0).any():
                raise errors.InvalidNodeData(
                    f"contest {contest.name!r} side {side}: negative vote count"
                )
    elections = ElectionSet(
        [
            Contest(
                c.name,
                np.ascontiguousarray(c.dem, dtype=np.int64),
                np.ascontiguousarray(c.rep, dtype=np.int64),
            )
            for c in elections
        ]
    )

    edge_a = np.array([e.a for e in resolved], dtype=np.int64)
    edge_b = np.array([e.b for e in resolved], dtype=np.int64)
    edge_shared = np.array([e.shared_perimeter for e in resolved], dtype=np.float64)

    nbr_lists: list = [[] for _ in range(n)]
    for e in resolved:
        nbr_lists[e.a].append(e.b)
        nbr_lists[e.b].append(e.a)
    neighbors = tuple(np.array(sorted(lst), dtype=np.int64) for lst in nbr_lists)

    comps = _components(n, neighbors)
    if len(comps) > 1:
        raise errors.DisconnectedGraph(comps)

    county_ids = [node.county_id for node in nodes]
    muni_ids = [node.muni_id for node in nodes]
    _, county_codes = np.unique(county_ids, return_inverse=True)
    _, muni_codes = np.unique(muni_ids, return_inverse=True)

    return PrecinctGraph(
        nodes=nodes,
        edges=tuple(resolved),
        node_index=node_index,
        elections=elections,
        populations=np.array([nd.population for nd in nodes], dtype=np.int64),
        areas=np.array([nd.area for nd in nodes], dtype=np.float64),
        perimeters=np.array([nd.perimeter for nd in nodes], dtype=np.float64),
        county_of=tuple(county_ids),
        muni_of=tuple(muni_ids),
        county_codes=county_codes.astype(np.int64),
        muni_codes=muni_codes.astype(np.int64),
        n_counties=len(set(county_ids)),
        n_munis=len(set(muni_ids)),
        edge_a=edge_a,
        edge_b=edge_b,
        edge_shared=edge_shared,
        neighbors=neighbors,
    )


def district_populations(graph: PrecinctGraph, plan: Plan) -> np.ndarray:
    """Population of each district; sums exactly to the graph total."""
    out = np.bincount(
        plan.assignment, weights=graph.populations.astype(np.float64), minlength=plan.k
    )
    return out.astype(np.int64)


def _district_connected(graph: PrecinctGraph, members: np.ndarray, label_of, d) -> bool:
    if members.size == 0:
        return False
    seen = set()
    stack = [int(members[0])]
    seen.add(int(members[0]))
    while stack:
        u = stack.pop()
        for v in graph.neighbors[u]:
            v = int(v)
            if label_of[v] == d and v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == members.size


def is_contiguous(graph: PrecinctGraph, plan: Plan) -> list:
    """Per-district flag: does the district induce a connected subgraph?"""
    assignment = plan.assignment
    return [
        _district_connected(graph, plan.district_nodes(d), assignment, d)
        for d in range(plan.k)
    ]


def district_perimeter_area(graph: PrecinctGraph, plan: Plan):
    """Per-district ``(perimeters, areas)`` arrays.

    perimeter(d) = sum of node perimeters in d minus twice the shared
    boundary over edges internal to d. Raises ``NegativePerimeter`` when the
    result is not strictly positive (the shared_perimeter inputs then violate
    the per-edge bound).
    """
    assign = plan.assignment
    k = plan.k
    areas = np.bincount(assign, weights=graph.areas, minlength=k)
    perims = np.bincount(assign, weights=graph.perimeters, minlength=k)
    if graph.n_edges:
        internal = assign[graph.edge_a] == assign[graph.edge_b]
        if internal.any():
            shared = np.bincount(
                assign[graph.edge_a[internal]],
                weights=graph.edge_shared[internal],
                minlength=k,
            )
            perims = perims - 2.0 * shared
    if (perims <= 0).any():
        bad = np.flatnonzero(perims <= 0).tolist()
        raise errors.NegativePerimeter(
            f"districts {bad} have non-positive perimeter; "
            "check shared_perimeter inputs"
        )
    return perims, areas
