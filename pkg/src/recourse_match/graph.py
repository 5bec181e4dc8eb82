"""Undirected graphs with unreliable edges, and edge-set algebra over them.

Every edge has a canonical index (edges sorted by ``(min(u, v), max(u, v))``)
and edge sets are Python integers used as bitmasks over those indices.  Python
integers are unbounded, so graphs with more than 64 edges need no special
handling.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from functools import cached_property

DEFAULT_WEIGHT = 2.0


class GraphError(ValueError):
    """Invalid graph construction input."""

    def __init__(self, message: str, edge: tuple[int, int] | None = None):
        super().__init__(message)
        self.edge = edge


class SelfLoopError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class VertexRangeError(GraphError):
    pass


class ProbabilityRangeError(GraphError):
    pass


class NegativeWeightError(GraphError):
    pass


class GraphMismatchError(ValueError):
    """Two edge sets belonging to different graphs were combined."""


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of set bits in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True, eq=False)
class FailureGraph:
    """An immutable undirected graph with a failure probability and a served
    weight on every edge.

    Use :func:`build_graph` to construct one from raw input; the constructor
    assumes the fields are already canonical.
    """

    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    fail_prob: tuple[float, ...]
    weight: tuple[float, ...]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FailureGraph):
            return NotImplemented
        return self is other or (
            self.vertex_count == other.vertex_count
            and self.edges == other.edges
            and self.fail_prob == other.fail_prob
            and self.weight == other.weight
        )

    def __hash__(self) -> int:
        return hash((self.vertex_count, self.edges, self.fail_prob, self.weight))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def full_mask(self) -> int:
        return (1 << len(self.edges)) - 1

    @cached_property
    def incident(self) -> tuple[int, ...]:
        """Mask of edges incident to each vertex."""
        masks = [0] * self.vertex_count
        for i, (u, v) in enumerate(self.edges):
            masks[u] |= 1 << i
            masks[v] |= 1 << i
        return tuple(masks)

    @cached_property
    def conflict(self) -> tuple[int, ...]:
        """Mask of edges sharing an endpoint with each edge, the edge included."""
        inc = self.incident
        return tuple(inc[u] | inc[v] for u, v in self.edges)

    @cached_property
    def _index(self) -> dict[tuple[int, int], int]:
        return {e: i for i, e in enumerate(self.edges)}

    def edge_index(self, u: int, v: int) -> int:
        try:
            return self._index[(min(u, v), max(u, v))]
        except KeyError:
            raise KeyError(f"no edge {{{u},{v}}} in graph") from None

    def edge_set(self, items: Iterable[int | tuple[int, int]] = ()) -> EdgeSet:
        """Edge set from edge indices or ``(u, v)`` endpoint pairs."""
        mask = 0
        for item in items:
            if isinstance(item, tuple):
                mask |= 1 << self.edge_index(*item)
            else:
                if not 0 <= item < len(self.edges):
                    raise IndexError(f"edge index {item} out of range")
                mask |= 1 << item
        return EdgeSet(self, mask)

    def matching(self, items: Iterable[int | tuple[int, int]] = ()) -> Matching:
        return Matching(self, self.edge_set(items).mask)

    def all_edges(self) -> EdgeSet:
        return EdgeSet(self, self.full_mask)

    def no_edges(self) -> EdgeSet:
        return EdgeSet(self, 0)

    def subgraph(self, active: EdgeSet) -> FailureGraph:
        """Graph on the same vertices keeping only the edges in ``active``."""
        self._check_owner(active)
        idx = list(iter_bits(active.mask))
        return FailureGraph(
            self.vertex_count,
            tuple(self.edges[i] for i in idx),
            tuple(self.fail_prob[i] for i in idx),
            tuple(self.weight[i] for i in idx),
        )

    def with_probabilities(self, probs: Sequence[float]) -> FailureGraph:
        """Same topology and weights, new per-edge failure probabilities."""
        if len(probs) != len(self.edges):
            raise ValueError(f"expected {len(self.edges)} probabilities, got {len(probs)}")
        return build_graph(
            self.vertex_count,
            [(u, v, p, w) for (u, v), p, w in zip(self.edges, probs, self.weight)],
        )

    def _check_owner(self, es: EdgeSet) -> None:
        if es.graph is not self and es.graph != self:
            raise GraphMismatchError("edge set belongs to a different graph")


def build_graph(
    vertex_count: int,
    edges: Iterable[Sequence[float]],
) -> FailureGraph:
    """Validate raw edges and return a canonical :class:`FailureGraph`.

    Each item of ``edges`` is ``(u, v, p)`` or ``(u, v, p, w)``; the weight
    defaults to 2.0 so that values count served vertices.

    Raises:
        SelfLoopError, DuplicateEdgeError, VertexRangeError,
        ProbabilityRangeError, NegativeWeightError: each carries the
        offending edge in its ``edge`` attribute.
    """
    if vertex_count < 0:
        raise GraphError(f"vertex_count must be nonnegative, got {vertex_count}")
    rows: dict[tuple[int, int], tuple[float, float]] = {}
    for item in edges:
        if len(item) == 3:
            u, v, p = item
            w = DEFAULT_WEIGHT
        elif len(item) == 4:
            u, v, p, w = item
        else:
            raise GraphError(f"edge must be (u, v, p) or (u, v, p, w), got {item!r}")
        u, v = int(u), int(v)
        key = (min(u, v), max(u, v))
        if u == v:
            raise SelfLoopError(f"self-loop at vertex {u}", key)
        if not (0 <= key[0] and key[1] < vertex_count):
            raise VertexRangeError(
                f"edge {{{u},{v}}} has an endpoint outside 0..{vertex_count - 1}", key
            )
        if key in rows:
            raise DuplicateEdgeError(f"duplicate edge {{{u},{v}}}", key)
        p, w = float(p), float(w)
        if not 0.0 <= p <= 1.0:
            raise ProbabilityRangeError(
                f"failure probability {p!r} of edge {{{u},{v}}} is outside [0, 1]", key
            )
        if not w >= 0.0:
            raise NegativeWeightError(f"weight {w!r} of edge {{{u},{v}}} is negative", key)
        rows[key] = (p, w)
    order = sorted(rows)
    return FailureGraph(
        vertex_count,
        tuple(order),
        tuple(rows[e][0] for e in order),
        tuple(rows[e][1] for e in order),
    )


@dataclass(frozen=True, eq=False)
class EdgeSet:
    """A set of edges of one :class:`FailureGraph`, stored as a bitmask."""

    graph: FailureGraph = field(repr=False)
    mask: int

    def __post_init__(self) -> None:
        if self.mask < 0 or self.mask >> len(self.graph.edges):
            raise ValueError(f"mask {self.mask:#x} has bits outside the graph's edges")

    def _other(self, other: EdgeSet) -> int:
        if not isinstance(other, EdgeSet):
            raise TypeError(f"expected EdgeSet, got {type(other).__name__}")
        self.graph._check_owner(other)
        return other.mask

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EdgeSet):
            return NotImplemented
        return self.mask == self._other(other)

    def __hash__(self) -> int:
        return hash(self.mask)

    def __or__(self, other: EdgeSet) -> EdgeSet:
        return EdgeSet(self.graph, self.mask | self._other(other))

    def __and__(self, other: EdgeSet) -> EdgeSet:
        return EdgeSet(self.graph, self.mask & self._other(other))

    def __sub__(self, other: EdgeSet) -> EdgeSet:
        return EdgeSet(self.graph, self.mask & ~self._other(other))

    def issubset(self, other: EdgeSet) -> bool:
        return self.mask & ~self._other(other) == 0

    def __len__(self) -> int:
        return popcount(self.mask)

    def __bool__(self) -> bool:
        return self.mask != 0

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.mask)

    def __contains__(self, index: int) -> bool:
        return bool(self.mask >> index & 1)

    def pairs(self) -> list[tuple[int, int]]:
        return [self.graph.edges[i] for i in iter_bits(self.mask)]

    def vertices(self) -> set[int]:
        return {x for e in self.pairs() for x in e}

    def is_matching(self) -> bool:
        seen: set[int] = set()
        for u, v in self.pairs():
            if u in seen or v in seen:
                return False
            seen.update((u, v))
        return True

    def __repr__(self) -> str:
        body = ", ".join(f"{u}{'-' if u > 9 or v > 9 else ''}{v}" for u, v in self.pairs())
        return f"{type(self).__name__}({{{body}}})"


class Matching(EdgeSet):
    """An edge set in which no two edges share an endpoint."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if not self.is_matching():
            raise ValueError(f"edges {self.pairs()} are not vertex-disjoint")


def connected_components(graph: FailureGraph, active: EdgeSet | None = None) -> list[frozenset[int]]:
    """Partition all vertices by connectivity through ``active`` edges.

    Vertices touched by no active edge come back as singletons.  Components
    are ordered by their smallest vertex.
    """
    mask = graph.full_mask if active is None else _owned_mask(graph, active)
    parent = list(range(graph.vertex_count))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in iter_bits(mask):
        u, v = graph.edges[i]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    groups: dict[int, set[int]] = {}
    for x in range(graph.vertex_count):
        groups.setdefault(find(x), set()).add(x)
    return [frozenset(g) for _, g in sorted(groups.items())]


def edge_components(graph: FailureGraph, mask: int) -> list[int]:
    """Split an edge mask into the edge masks of its connected components,
    ordered by lowest edge index."""
    conflict = graph.conflict
    out = []
    while mask:
        comp = mask & -mask
        frontier = comp
        while frontier:
            grow = 0
            for i in iter_bits(frontier):
                grow |= conflict[i]
            grow &= mask & ~comp
            comp |= grow
            frontier = grow
        out.append(comp)
        mask &= ~comp
    return out


def residual_mask(graph: FailureGraph, active: int, succeeded: int, failed: int) -> int:
    removed = failed
    conflict = graph.conflict
    for i in iter_bits(succeeded):
        removed |= conflict[i]
    return active & ~removed


def residual_after_pattern(active: EdgeSet, succeeded: EdgeSet, failed: EdgeSet) -> EdgeSet:
    """Edges still available after observing a matching.

    Failed edges are dropped, and so is every edge touching an endpoint of a
    succeeded edge (the succeeded edges themselves included).

    Raises:
        ValueError: if ``succeeded`` or ``failed`` is not inside ``active``,
            if they overlap, or if together they are not a matching.
    """
    graph = active.graph
    s, f = active._other(succeeded), active._other(failed)
    if (s | f) & ~active.mask:
        raise ValueError("succeeded and failed edges must lie inside the active set")
    if s & f:
        raise ValueError("an edge cannot both succeed and fail")
    if not EdgeSet(graph, s | f).is_matching():
        raise ValueError("observed edges do not form a matching")
    return EdgeSet(graph, residual_mask(graph, active.mask, s, f))


def _owned_mask(graph: FailureGraph, es: EdgeSet) -> int:
    graph._check_owner(es)
    return es.mask
