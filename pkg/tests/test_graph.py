import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mapchain import errors
from mapchain.graph import (
    AdjacencyEdge,
    Contest,
    ElectionSet,
    Plan,
    PrecinctNode,
    build_graph,
    canonical_form,
    district_perimeter_area,
    district_populations,
    is_contiguous,
)
from mapchain.synth import grid_graph, grid_nodes_edges

from conftest import make_path_graph


def small_election(n):
    return ElectionSet([Contest("E", np.full(n, 5, dtype=np.int64), np.full(n, 5, dtype=np.int64))])


def test_build_2x2_grid():
    nodes, edges = grid_nodes_edges(2, 2)
    g = build_graph(nodes, edges, small_election(4))
    assert g.n == 4
    assert g.n_edges == 4
    assert g.total_population == 4


def test_disconnected_graph_lists_components():
    nodes, _ = grid_nodes_edges(2, 2)
    with pytest.raises(errors.DisconnectedGraph) as err:
        build_graph(nodes, [AdjacencyEdge(0, 1)], small_election(4))
    comps = err.value.components
    assert [0, 1] in comps
    assert [2] in comps and [3] in comps


def test_grid4_fixture_counts(grid4):
    assert grid4.n == 16
    assert grid4.n_edges == 24  # 2 * 4 * 3 rook edges


def test_duplicate_precinct_id():
    nodes = [
        PrecinctNode("p0", 1, "C0", "M0", 1.0, 4.0),
        PrecinctNode("p0", 1, "C0", "M0", 1.0, 4.0),
    ]
    with pytest.raises(errors.DuplicatePrecinctId):
        build_graph(nodes, [AdjacencyEdge(0, 1)], small_election(2))


def test_dangling_edge_and_self_loop_and_duplicate():
    nodes = [
        PrecinctNode("p0", 1, "C0", "M0", 1.0, 4.0),
        PrecinctNode("p1", 1, "C0", "M0", 1.0, 4.0),
    ]
    with pytest.raises(errors.DanglingEdge):
        build_graph(nodes, [AdjacencyEdge("p0", "nope")], small_election(2))
    with pytest.raises(errors.InvalidEdge):
        build_graph(nodes, [AdjacencyEdge(0, 0)], small_election(2))
    with pytest.raises(errors.DuplicateEdge):
        build_graph(
            nodes,
            [AdjacencyEdge(0, 1), AdjacencyEdge(1, 0)],
            small_election(2),
        )


def test_missing_vote_column_length():
    nodes = [
        PrecinctNode("p0", 1, "C0", "M0", 1.0, 4.0),
        PrecinctNode("p1", 1, "C0", "M0", 1.0, 4.0),
    ]
    bad = ElectionSet([Contest("E", np.array([1]), np.array([1, 2]))])
    with pytest.raises(errors.MissingVoteColumn):
        build_graph(nodes, [AdjacencyEdge(0, 1)], bad)


def test_bad_node_scalars():
    with pytest.raises(errors.InvalidNodeData):
        build_graph(
            [PrecinctNode("p0", -1, "C0", "M0", 1.0, 4.0)], [], small_election(1)
        )
    with pytest.raises(errors.InvalidNodeData):
        build_graph(
            [PrecinctNode("p0", 1, "C0", "M0", 0.0, 4.0)], [], small_election(1)
        )


def test_plan_validation():
    with pytest.raises(ValueError):
        Plan([0, 1, 3], 4)  # label 2 empty
    with pytest.raises(ValueError):
        Plan([0, 1, 2], 2)  # label out of range
    plan = Plan([1, 0, 1], 2)
    assert plan.k == 2
    with pytest.raises(ValueError):
        plan.assignment[0] = 5  # frozen array


def test_district_populations_simple(grid22):
    plan = Plan([0, 0, 1, 1], 2)
    assert district_populations(grid22, plan).tolist() == [2, 2]
    whole = Plan([0, 0, 0, 0], 1)
    assert district_populations(grid22, whole).tolist() == [4]


def test_district_populations_row_bands(grid4, band4):
    assert district_populations(grid4, band4).tolist() == [4, 4, 4, 4]


def test_is_contiguous_cases(grid4, grid22, band4):
    assert is_contiguous(grid4, band4) == [True, True, True, True]
    # opposite corners of the 2x2 grid share no rook edge (both districts here
    # are diagonal pairs)
    corners = Plan([0, 1, 1, 0], 2)
    assert is_contiguous(grid22, corners) == [False, False]
    columns = Plan([0, 1, 0, 1], 2)
    assert is_contiguous(grid22, columns) == [True, True]


def test_is_contiguous_snake(grid4):
    # a snake: row 0 plus the right column vs everything else
    assignment = np.ones(16, dtype=np.int64)
    snake = [0, 1, 2, 3, 7, 11, 15]
    for i in snake:
        assignment[i] = 0
    plan = Plan(assignment, 2)
    assert is_contiguous(grid4, plan) == [True, True]


def test_perimeter_area_single_square():
    g = make_path_graph(1)
    perims, areas = district_perimeter_area(g, Plan([0], 1))
    assert perims[0] == pytest.approx(4.0)
    assert areas[0] == pytest.approx(1.0)


def test_perimeter_area_domino():
    g = make_path_graph(2)
    perims, areas = district_perimeter_area(g, Plan([0, 0], 1))
    assert perims[0] == pytest.approx(6.0)
    assert areas[0] == pytest.approx(2.0)


def test_perimeter_area_2x2_block(grid22):
    perims, areas = district_perimeter_area(grid22, Plan([0, 0, 0, 0], 1))
    assert perims[0] == pytest.approx(8.0)  # 4*4 - 2*4 internal
    assert areas[0] == pytest.approx(4.0)


def test_negative_perimeter_detected():
    nodes = [
        PrecinctNode("p0", 1, "C0", "M0", 1.0, 4.0),
        PrecinctNode("p1", 1, "C0", "M0", 1.0, 4.0),
    ]
    # shared boundary longer than either node perimeter
    g = build_graph(nodes, [AdjacencyEdge(0, 1, 5.0)], small_election(2))
    with pytest.raises(errors.NegativePerimeter):
        district_perimeter_area(g, Plan([0, 0], 1))


@st.composite
def grid_plans(draw):
    rows = draw(st.integers(2, 3))
    cols = draw(st.integers(2, 4))
    n = rows * cols
    k = draw(st.integers(1, min(4, n)))
    labels = draw(
        st.lists(st.integers(0, k - 1), min_size=n, max_size=n).filter(
            lambda ls: len(set(ls)) == k
        )
    )
    return rows, cols, Plan(np.array(labels), k)


@given(grid_plans())
@settings(max_examples=40, deadline=None)
def test_conservation_properties(case):
    rows, cols, plan = case
    g = grid_graph(rows, cols)
    pops = district_populations(g, plan)
    assert pops.sum() == g.total_population
    # merging everything into one district recovers the global geometry sums
    merged = Plan(np.zeros(g.n, dtype=np.int64), 1)
    perims, areas = district_perimeter_area(g, merged)
    assert areas.sum() == pytest.approx(g.areas.sum())
    assert perims.sum() == pytest.approx(
        g.perimeters.sum() - 2.0 * g.edge_shared.sum()
    )
    # per-plan area conservation
    _, plan_areas = district_perimeter_area(g, plan)
    assert plan_areas.sum() == pytest.approx(g.areas.sum())


def _flood_fill_connected(g, members):
    members = set(int(m) for m in members)
    if not members:
        return False
    start = next(iter(members))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in g.neighbors[u]:
            v = int(v)
            if v in members and v not in seen:
                seen.add(v)
                stack.append(v)
    return seen == members


@given(grid_plans())
@settings(max_examples=40, deadline=None)
def test_contiguity_matches_flood_fill_oracle(case):
    rows, cols, plan = case
    g = grid_graph(rows, cols)
    flags = is_contiguous(g, plan)
    expected = [
        _flood_fill_connected(g, plan.district_nodes(d)) for d in range(plan.k)
    ]
    assert flags == expected


def test_canonical_form_first_appearance():
    plan = Plan([2, 2, 0, 1], 3)
    assert canonical_form(plan) == (0, 0, 1, 2)
