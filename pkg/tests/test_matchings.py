import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import c4, k4, subset_matchings
from recourse_match.bench import small_graphs
from recourse_match.graph import build_graph
from recourse_match.matchings import all_matchings, best_static_matching, count_matchings


def as_pairs(ms):
    return [frozenset(m.pairs()) for m in ms]


@pytest.mark.parametrize("graph, expected", [(c4(), 6), (k4(), 9), (build_graph(2, [(0, 1, 0.3)]), 1)])
def test_matching_counts_match_subset_filter(graph, expected):
    brute = subset_matchings(list(graph.edges))
    assert len(brute) == expected
    listed = as_pairs(all_matchings(graph))
    assert len(listed) == expected
    assert set(listed) == set(brute)
    assert count_matchings(graph) == expected


def test_c4_enumeration_order():
    # lowest edge first, "take" branch before "skip" branch
    g = c4()
    assert [m.pairs() for m in all_matchings(g)] == [
        [(0, 1)],
        [(0, 1), (2, 3)],
        [(0, 3)],
        [(0, 3), (1, 2)],
        [(1, 2)],
        [(2, 3)],
    ]


def test_k4_perfect_matchings():
    perfect = [m for m in all_matchings(k4()) if len(m) == 2]
    assert len(perfect) == 3


def test_empty_active():
    g = c4()
    assert list(all_matchings(g, g.no_edges())) == []
    assert count_matchings(g, g.no_edges()) == 0


def test_all_small_graphs_agree_with_subset_filter():
    for g in small_graphs(6, 6):
        brute = subset_matchings(list(g.edges))
        listed = as_pairs(all_matchings(g))
        assert len(listed) == len(set(listed)) == len(brute) == count_matchings(g)
        assert set(listed) == set(brute)


@settings(max_examples=150)
@given(st.integers(2, 7), st.data())
def test_stream_properties(n, data):
    pairs = list(itertools.combinations(range(n), 2))
    chosen = data.draw(st.lists(st.sampled_from(pairs), unique=True, max_size=9))
    g = build_graph(n, [(u, v, 0.5) for u, v in chosen])
    active = g.edge_set(data.draw(st.sets(st.sampled_from(range(g.edge_count)))) if g.edge_count else ())
    ms = list(all_matchings(g, active))
    assert all(m and m.is_matching() and m.issubset(active) for m in ms)
    assert len({m.mask for m in ms}) == len(ms)
    assert count_matchings(g, active) == len(ms)


def test_best_static_c4_tie_goes_to_first():
    m, value = best_static_matching(c4(0.5))
    assert m.pairs() == [(0, 1), (2, 3)]
    assert value == pytest.approx(2.0, abs=1e-12)


def test_best_static_brute_force_c4():
    g = c4(0.5)
    values = [sum(2 * (1 - 0.5) for _ in m) for m in subset_matchings(list(g.edges))]
    assert best_static_matching(g)[1] == pytest.approx(max(values), abs=1e-12)


def test_best_static_single_edge():
    g = build_graph(2, [(0, 1, 0.3)])
    m, value = best_static_matching(g)
    assert m.pairs() == [(0, 1)]
    assert value == pytest.approx(1.4, abs=1e-12)


def test_best_static_all_fail():
    assert best_static_matching(c4(1.0))[1] == 0.0


def test_best_static_empty():
    g = c4()
    m, value = best_static_matching(g, g.no_edges())
    assert not m and value == 0.0
