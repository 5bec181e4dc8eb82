from __future__ import annotations

import itertools

import pytest

from recourse_match.graph import build_graph

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def c4(p=0.5):
    """Square 0-1-2-3-0; ``p`` is a scalar or (p01, p12, p23, p03)."""
    ps = (p,) * 4 if isinstance(p, (int, float)) else tuple(p)
    return build_graph(4, [(0, 1, ps[0]), (1, 2, ps[1]), (2, 3, ps[2]), (0, 3, ps[3])])


def k4(p=0.5):
    return build_graph(4, [(u, v, p) for u, v in itertools.combinations(range(4), 2)])


def subset_matchings(edges):
    """All non-empty pairwise vertex-disjoint subsets, by plain filtering."""
    out = []
    for r in range(1, len(edges) + 1):
        for combo in itertools.combinations(edges, r):
            ends = [x for e in combo for x in e]
            if len(ends) == len(set(ends)):
                out.append(frozenset(combo))
    return out


@pytest.fixture
def square():
    return c4(0.5)


@pytest.fixture
def complete4():
    return k4(0.5)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
