"""Maximum-expectation matching under N-recourse.

``solve`` splits the active edges into connected components and, for each
one, keeps the matching with the best ``evaluate_matching`` value.
``evaluate_matching`` walks every success/failure pattern of the matching,
credits the served weight, and recurses into ``solve`` on the residual
graph while observation rounds remain.  Component values are memoized on
``(component edge mask, remaining budget)``.

A budget of ``Finite(n)`` allows ``n`` further observations after the first
one; ``Finite(0)`` is plain matching with no recourse.  ``UNLIMITED`` keeps
going until no edges remain, and is stored internally as ``Finite(k - 1)`` for a
component with ``k`` edges, since it can never use more than ``k - 1``
recourses.
"""

from __future__ import annotations

import math
import time
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

from .graph import (
    EdgeSet,
    FailureGraph,
    Matching,
    _owned_mask,
    edge_components,
    iter_bits,
    popcount,
)
from .matchings import iter_matching_masks

DEADLINE_CHECK_EVERY = 256


class SolveTimeout(RuntimeError):
    """The solver passed its deadline; partial work was discarded."""


class MemoConsistencyError(RuntimeError):
    pass


@dataclass(frozen=True)
class RecourseBudget:
    """Number of recourse observations left; ``limit=None`` means unlimited."""

    limit: int | None = None

    def __post_init__(self) -> None:
        if self.limit is not None and self.limit < 0:
            raise ValueError(f"budget must be nonnegative, got {self.limit}")

    @classmethod
    def finite(cls, n: int) -> RecourseBudget:
        return cls(int(n))

    @classmethod
    def parse(cls, text: str) -> RecourseBudget:
        text = text.strip().lower()
        if text in ("inf", "infinity", "unlimited", "∞"):
            return UNLIMITED
        try:
            return cls(int(text))
        except ValueError:
            raise ValueError(f"budget must be a nonnegative integer or 'inf', got {text!r}") from None

    @property
    def unlimited(self) -> bool:
        return self.limit is None

    def __str__(self) -> str:
        return "inf" if self.limit is None else str(self.limit)


UNLIMITED = RecourseBudget(None)


def as_budget(budget: RecourseBudget | int | float | str | None) -> RecourseBudget:
    if isinstance(budget, RecourseBudget):
        return budget
    if budget is None or (isinstance(budget, float) and math.isinf(budget)):
        return UNLIMITED
    if isinstance(budget, str):
        return RecourseBudget.parse(budget)
    if isinstance(budget, float) and not budget.is_integer():
        raise ValueError(f"budget must be integral, got {budget}")
    return RecourseBudget(int(budget))


@dataclass(frozen=True)
class MemoEntry:
    value: float
    best: int


class MemoTable:
    """Component values keyed on ``(edge mask, clamped budget)``.

    Bound to the first graph it is used with.  Entries are write-once; a
    second store under the same key must carry the identical value.
    """

    def __init__(self) -> None:
        self._entries: dict[tuple[int, int], MemoEntry] = {}
        self.graph: FailureGraph | None = None

    def bind(self, graph: FailureGraph) -> None:
        if self.graph is None:
            self.graph = graph
        elif self.graph is not graph and self.graph != graph:
            raise ValueError("memo table already holds entries for a different graph")

    def get(self, key: tuple[int, int]) -> MemoEntry | None:
        return self._entries.get(key)

    def store(self, key: tuple[int, int], entry: MemoEntry) -> None:
        old = self._entries.get(key)
        if old is not None and old != entry:
            raise MemoConsistencyError(f"memo key {key} recomputed as {entry}, stored {old}")
        self._entries[key] = entry

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: object) -> bool:
        return key in self._entries


@dataclass
class SolveStats:
    memo_hits: int = 0
    evaluate_calls: int = 0
    elapsed: float = 0.0


@dataclass
class SolveResult:
    value: float
    components: list[tuple[frozenset[int], Matching]]
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def first_matching(self) -> list[tuple[int, int]]:
        """Union of the per-component matchings, as endpoint pairs."""
        return sorted(e for _, m in self.components for e in m.pairs())


@dataclass(frozen=True)
class FailurePattern:
    succeeded: EdgeSet
    failed: EdgeSet
    probability: float


def iter_patterns(
    edges: Sequence[int], fail_prob: Sequence[float], weight: Sequence[float]
) -> Iterator[tuple[float, float, int, int]]:
    """Yield ``(q, served, succeeded_mask, failed_mask)`` for every outcome of
    the given edges.

    Patterns are counted in binary with bit ``k`` standing for ``edges[k]``
    and a set bit meaning success, so pattern 0 is "everything failed".
    """
    k = len(edges)
    for b in range(1 << k):
        q = 1.0
        served = 0.0
        succ = fail = 0
        for j in range(k):
            e = edges[j]
            if b >> j & 1:
                q *= 1.0 - fail_prob[e]
                served += weight[e]
                succ |= 1 << e
            else:
                q *= fail_prob[e]
                fail |= 1 << e
        yield q, served, succ, fail


def enumerate_patterns(m: Matching, probs: Sequence[float] | None = None) -> Iterator[FailurePattern]:
    """Every success/failure assignment to the edges of ``m``, with its
    probability.  ``probs`` overrides the graph's failure probabilities and
    is aligned with ``m``'s edges in canonical order."""
    if not m:
        raise ValueError("cannot enumerate patterns of an empty matching")
    graph = m.graph
    idx = list(m)
    fail_prob: Sequence[float] = graph.fail_prob
    if probs is not None:
        if len(probs) != len(idx):
            raise ValueError(f"expected {len(idx)} probabilities, got {len(probs)}")
        override = list(graph.fail_prob)
        for i, p in zip(idx, probs):
            override[i] = float(p)
        fail_prob = override
    for q, _served, succ, fail in iter_patterns(idx, fail_prob, graph.weight):
        yield FailurePattern(EdgeSet(graph, succ), EdgeSet(graph, fail), q)


class _Search:
    """One solve invocation: graph tables, memo, counters, deadline."""

    def __init__(
        self,
        graph: FailureGraph,
        memo: MemoTable | None,
        *,
        memoize: bool = True,
        decompose: bool = True,
        prune_zero: bool = False,
        deadline: float | None = None,
    ):
        self.graph = graph
        self.conflict = graph.conflict
        self.fail_prob = graph.fail_prob
        self.weight = graph.weight
        self.memo = memo if memoize else None
        if self.memo is not None:
            self.memo.bind(graph)
        self.decompose = decompose
        self.prune_zero = prune_zero
        self.deadline = deadline
        self.stats = SolveStats()
        self._split: dict[int, list[int]] = {}

    def components(self, mask: int) -> list[int]:
        if not mask:
            return []
        if not self.decompose:
            return [mask]
        parts = self._split.get(mask)
        if parts is None:
            parts = self._split[mask] = edge_components(self.graph, mask)
        return parts

    def solve_mask(self, mask: int, n: int | None) -> float:
        total = 0.0
        for comp in self.components(mask):
            total += self.solve_component(comp, n).value
        return total

    def solve_component(self, comp: int, n: int | None) -> MemoEntry:
        # k edges allow at most k - 1 recourses, so larger budgets share one key
        cap = popcount(comp) - 1
        n = cap if n is None or n > cap else n
        key = (comp, n)
        memo = self.memo
        if memo is not None:
            hit = memo.get(key)
            if hit is not None:
                self.stats.memo_hits += 1
                return hit
        best, best_value = 0, None
        for m in iter_matching_masks(self.conflict, comp):
            z = self.evaluate(m, comp, n)
            if best_value is None or z > best_value:
                best, best_value = m, z
        entry = MemoEntry(best_value if best_value is not None else 0.0, best)
        if memo is not None:
            memo.store(key, entry)
        return entry

    def outcomes(self, m: int, base: int) -> list[tuple[float, float, int]]:
        """``(q, served weight, residual mask)`` for each pattern of ``m``, in
        the binary-counting order of :func:`iter_patterns`."""
        fail_prob, weight, conflict = self.fail_prob, self.weight, self.conflict
        out = [(1.0, 0.0, base)]
        for i in reversed(list(iter_bits(m))):
            p, w, keep = fail_prob[i], weight[i], ~conflict[i]
            s = 1.0 - p
            out = [y for q, v, r in out for y in ((q * p, v, r), (q * s, v + w, r & keep))]
        return out

    def evaluate(self, m: int, residual: int, n: int | None) -> float:
        stats = self.stats
        stats.evaluate_calls += 1
        if self.deadline is not None and stats.evaluate_calls % DEADLINE_CHECK_EVERY == 0:
            if time.monotonic() > self.deadline:
                raise SolveTimeout(f"deadline passed after {stats.evaluate_calls} evaluations")
        recourse = n is None or n >= 1
        n_next = None if n is None else n - 1
        prune = self.prune_zero
        z = 0.0
        for q, served, rest in self.outcomes(m, residual & ~m):
            if prune and q == 0.0:
                continue
            if recourse and rest:
                z += q * (served + self.solve_mask(rest, n_next))
            else:
                z += q * served
        return z


def _start(
    graph: FailureGraph,
    memo: MemoTable | None,
    memoize: bool,
    decompose: bool,
    prune_zero: bool,
    timeout: float | None,
) -> _Search:
    deadline = None if timeout is None else time.monotonic() + timeout
    if memo is None and memoize:
        memo = MemoTable()
    return _Search(graph, memo, memoize=memoize, decompose=decompose, prune_zero=prune_zero, deadline=deadline)


def solve(
    graph: FailureGraph,
    active: EdgeSet | None = None,
    budget: RecourseBudget | int | str | None = UNLIMITED,
    memo: MemoTable | None = None,
    *,
    memoize: bool = True,
    decompose: bool = True,
    prune_zero: bool = False,
    timeout: float | None = None,
) -> SolveResult:
    """Maximum expected served weight and an optimal first matching.

    Args:
        graph: the instance.
        active: edges still available; defaults to all edges.
        budget: recourse observations allowed after the first one.
        memo: table to reuse; a fresh one is made when omitted.
        memoize: turn memoization off entirely (values are unchanged).
        decompose: split into connected components at every level.
        prune_zero: skip failure patterns of probability zero.
        timeout: seconds before :class:`SolveTimeout` is raised.

    Returns:
        A :class:`SolveResult`; its ``components`` pair each non-trivial
        component's vertex set with the first optimal matching found in
        enumeration order.
    """
    mask = graph.full_mask if active is None else _owned_mask(graph, active)
    n = as_budget(budget).limit
    t0 = time.perf_counter()
    search = _start(graph, memo, memoize, decompose, prune_zero, timeout)
    total = 0.0
    parts = []
    for comp in search.components(mask):
        entry = search.solve_component(comp, n)
        total += entry.value
        verts = frozenset(x for i in iter_bits(comp) for x in graph.edges[i])
        parts.append((verts, Matching(graph, entry.best)))
    search.stats.elapsed = time.perf_counter() - t0
    return SolveResult(total, parts, search.stats)


def evaluate_matching(
    graph: FailureGraph,
    m: Matching,
    residual: EdgeSet | None = None,
    budget: RecourseBudget | int | str | None = UNLIMITED,
    memo: MemoTable | None = None,
    *,
    memoize: bool = True,
    decompose: bool = True,
    prune_zero: bool = False,
) -> float:
    """Expected served weight of proposing ``m`` now and playing optimally
    on whatever remains.

    Raises:
        ValueError: if ``m`` is empty, not a matching, or not inside
            ``residual``.
    """
    r = graph.full_mask if residual is None else _owned_mask(graph, residual)
    mm = _owned_mask(graph, m)
    if not mm:
        raise ValueError("matching is empty")
    if mm & ~r:
        raise ValueError("matching is not contained in the residual edge set")
    if not isinstance(m, Matching) and not m.is_matching():
        raise ValueError(f"edges {m.pairs()} are not vertex-disjoint")
    n = as_budget(budget).limit
    if n is not None:
        n = min(n, popcount(r))
    search = _start(graph, memo, memoize, decompose, prune_zero, None)
    return search.evaluate(mm, r, n)


def value_forcing_first(
    graph: FailureGraph,
    m: Matching,
    budget: RecourseBudget | int | str | None = UNLIMITED,
    active: EdgeSet | None = None,
) -> float:
    """Value when ``m`` must be the first proposal on the active edges."""
    return evaluate_matching(graph, m, active, budget)
