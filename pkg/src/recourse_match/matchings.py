"""Enumeration of the matchings of a subgraph.

The recursion always branches on the lowest-index remaining edge and
explores "take it" before "skip it", so the stream order is fixed.  The
empty matching is never produced.
"""

from __future__ import annotations

from collections.abc import Iterator

from .graph import EdgeSet, FailureGraph, Matching, _owned_mask, iter_bits


def iter_matching_masks(conflict: tuple[int, ...], remaining: int, current: int = 0) -> Iterator[int]:
    """Yield bitmasks of every non-empty matching extending ``current``
    with edges from ``remaining``."""
    while remaining:
        low = remaining & -remaining
        taken = current | low
        yield taken
        rest = remaining & ~conflict[low.bit_length() - 1]
        if rest:
            yield from iter_matching_masks(conflict, rest, taken)
        remaining ^= low


def all_matchings(graph: FailureGraph, active: EdgeSet | None = None) -> Iterator[Matching]:
    """Lazily yield every non-empty matching inside ``active`` exactly once."""
    mask = graph.full_mask if active is None else _owned_mask(graph, active)
    for m in iter_matching_masks(graph.conflict, mask):
        yield Matching(graph, m)


def count_matching_masks(conflict: tuple[int, ...], mask: int) -> int:
    cache: dict[int, int] = {}

    def count(rest: int) -> int:
        if not rest:
            return 0
        hit = cache.get(rest)
        if hit is not None:
            return hit
        low = rest & -rest
        n = 1 + count(rest & ~conflict[low.bit_length() - 1]) + count(rest ^ low)
        cache[rest] = n
        return n

    return count(mask)


def count_matchings(graph: FailureGraph, active: EdgeSet | None = None) -> int:
    """Number of non-empty matchings, computed without listing them."""
    mask = graph.full_mask if active is None else _owned_mask(graph, active)
    return count_matching_masks(graph.conflict, mask)


def best_static_matching(graph: FailureGraph, active: EdgeSet | None = None) -> tuple[Matching, float]:
    """Matching maximizing expected served weight with no recourse.

    Exhaustive over :func:`all_matchings`; the first maximizer in stream order
    wins ties.  An empty edge set gives ``(empty matching, 0.0)``.
    """
    mask = graph.full_mask if active is None else _owned_mask(graph, active)
    gain = [w * (1.0 - p) for p, w in zip(graph.fail_prob, graph.weight)]
    best, best_value = 0, None
    for m in iter_matching_masks(graph.conflict, mask):
        value = 0.0
        for i in iter_bits(m):
            value += gain[i]
        if best_value is None or value > best_value:
            best, best_value = m, value
    return Matching(graph, best), 0.0 if best_value is None else best_value
