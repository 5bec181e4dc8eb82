import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import c4
from recourse_match.graph import (
    DuplicateEdgeError,
    EdgeSet,
    GraphMismatchError,
    Matching,
    NegativeWeightError,
    ProbabilityRangeError,
    SelfLoopError,
    VertexRangeError,
    build_graph,
    connected_components,
    edge_components,
    residual_after_pattern,
)


def test_build_c4_canonical_order():
    g = build_graph(4, [(2, 3, 0.5), (1, 0, 0.5), (3, 0, 0.5), (1, 2, 0.5)])
    assert g.edges == ((0, 1), (0, 3), (1, 2), (2, 3))
    assert g.fail_prob == (0.5,) * 4
    assert g.weight == (2.0,) * 4
    assert g.edge_count == 4


@pytest.mark.parametrize(
    "edges, error",
    [
        ([(2, 2, 0.5)], SelfLoopError),
        ([(0, 1, 0.5), (1, 0, 0.2)], DuplicateEdgeError),
        ([(0, 1, 1.3)], ProbabilityRangeError),
        ([(0, 1, -0.1)], ProbabilityRangeError),
        ([(0, 1, 0.5, -1.0)], NegativeWeightError),
        ([(0, 7, 0.5)], VertexRangeError),
    ],
)
def test_build_rejects_bad_edges(edges, error):
    with pytest.raises(error) as info:
        build_graph(4, edges)
    assert info.value.edge is not None


def test_error_names_offending_edge():
    with pytest.raises(ProbabilityRangeError, match=r"\{1,2\}") as info:
        build_graph(3, [(0, 1, 0.5), (1, 2, 1.3)])
    assert info.value.edge == (1, 2)


def test_components_c4():
    g = c4()
    assert connected_components(g, g.all_edges()) == [frozenset({0, 1, 2, 3})]
    assert connected_components(g, g.edge_set([(0, 1), (2, 3)])) == [frozenset({0, 1}), frozenset({2, 3})]


def test_components_empty_gives_singletons():
    g = build_graph(3, [(0, 1, 0.5)])
    assert connected_components(g, g.no_edges()) == [frozenset({0}), frozenset({1}), frozenset({2})]


def test_residual_success_and_failure_empties_c4():
    # 01 served removes 03 and 12 through shared endpoints; 23 failed.
    g = c4()
    r = residual_after_pattern(g.all_edges(), g.edge_set([(0, 1)]), g.edge_set([(2, 3)]))
    assert not r


def test_residual_single_failure_leaves_path():
    g = c4()
    r = residual_after_pattern(g.all_edges(), g.no_edges(), g.edge_set([(0, 1)]))
    assert r == g.edge_set([(1, 2), (2, 3), (0, 3)])


def test_residual_identity():
    g = c4()
    a = g.edge_set([(0, 1), (1, 2)])
    assert residual_after_pattern(a, g.no_edges(), g.no_edges()) == a


def test_residual_rejects_outside_active():
    g = c4()
    with pytest.raises(ValueError):
        residual_after_pattern(g.edge_set([(0, 1)]), g.edge_set([(2, 3)]), g.no_edges())


def test_edge_sets_from_different_graphs_do_not_mix():
    a, b = c4(0.5), c4(0.25)
    with pytest.raises(GraphMismatchError):
        a.all_edges() | b.all_edges()
    with pytest.raises(GraphMismatchError):
        a.all_edges() == b.all_edges()


def test_matching_rejects_shared_endpoint():
    g = c4()
    with pytest.raises(ValueError):
        g.matching([(0, 1), (1, 2)])


def test_more_than_64_edges():
    n = 13
    g = build_graph(n, [(u, v, 0.1) for u in range(n) for v in range(u + 1, n)])
    assert g.edge_count == 78
    top = g.edge_set([g.edge_count - 1])
    assert top.mask == 1 << 77
    r = residual_after_pattern(g.all_edges(), top, g.no_edges())
    assert len(r) == 78 - (2 * (n - 2) + 1)
    assert len(edge_components(g, g.full_mask)) == 1


@st.composite
def graph_with_pattern(draw):
    n = draw(st.integers(2, 7))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=10))
    g = build_graph(n, [(u, v, 0.5) for u, v in chosen])
    active = draw(st.integers(0, g.full_mask))
    # greedy matching inside active from a random edge order
    order = draw(st.permutations(list(EdgeSet(g, active))))
    used, m = set(), []
    for i in order:
        u, v = g.edges[i]
        if u not in used and v not in used:
            used.update((u, v))
            m.append(i)
    outcome = draw(st.lists(st.booleans(), min_size=len(m), max_size=len(m)))
    succ = [i for i, ok in zip(m, outcome) if ok]
    fail = [i for i, ok in zip(m, outcome) if not ok]
    return g, EdgeSet(g, active), g.edge_set(succ), g.edge_set(fail), g.edge_set(m)


@settings(max_examples=200)
@given(graph_with_pattern())
def test_residual_properties(case):
    g, active, succ, fail, m = case
    r = residual_after_pattern(active, succ, fail)
    assert r.issubset(active)
    assert not (r & m)
    served = succ.vertices()
    assert all(u not in served and v not in served for u, v in r.pairs())
    # greedy matchings are maximal: with no failures nothing is left
    if not fail:
        assert not residual_after_pattern(active, m, g.no_edges())


@settings(max_examples=200)
@given(graph_with_pattern())
def test_components_partition_vertices(case):
    g, active, *_ = case
    comps = connected_components(g, active)
    seen = [x for c in comps for x in c]
    assert sorted(seen) == list(range(g.vertex_count))
    assert [min(c) for c in comps] == sorted(min(c) for c in comps)
    for u, v in active.pairs():
        assert any(u in c and v in c for c in comps)


def test_matching_is_edge_set():
    g = c4()
    m = g.matching([(0, 1), (2, 3)])
    assert isinstance(m, Matching)
    assert m == g.edge_set([(0, 1), (2, 3)])
    assert len(m) == 2
