"""Independent reference computations for the solver.

The two brute-force routines work on frozensets of endpoint pairs and share
no code with :mod:`recourse_match.solver` or :mod:`recourse_match.matchings`.
They are exponential and meant for graphs with a handful of edges.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable

import numpy as np

from .graph import EdgeSet, FailureGraph, residual_after_pattern
from .solver import RecourseBudget, as_budget, solve

Edge = tuple[int, int]


def _edge_table(graph: FailureGraph, active: EdgeSet | None) -> dict[Edge, tuple[float, float]]:
    if active is None:
        idx: Iterable[int] = range(graph.edge_count)
    else:
        graph._check_owner(active)
        idx = list(active)
    return {graph.edges[i]: (graph.fail_prob[i], graph.weight[i]) for i in idx}


def _without_endpoints(edges: frozenset[Edge], u: int, v: int) -> frozenset[Edge]:
    return frozenset(e for e in edges if u not in e and v not in e)


def brute_force_unlimited(graph: FailureGraph, active: EdgeSet | None = None) -> float:
    """Best expected served weight when one edge is tried per observation
    and observations never run out."""
    table = _edge_table(graph, active)
    cache: dict[frozenset[Edge], float] = {}

    def value(edges: frozenset[Edge]) -> float:
        if not edges:
            return 0.0
        if edges in cache:
            return cache[edges]
        best = -math.inf
        for e in sorted(edges):
            p, w = table[e]
            fail_branch = value(edges - {e})
            ok_branch = w + value(_without_endpoints(edges, *e))
            best = max(best, p * fail_branch + (1.0 - p) * ok_branch)
        cache[edges] = best
        return best

    return value(frozenset(table))


def _split(edges: frozenset[Edge]) -> list[frozenset[Edge]]:
    adj: dict[int, set[Edge]] = {}
    for e in edges:
        for x in e:
            adj.setdefault(x, set()).add(e)
    seen: set[Edge] = set()
    parts = []
    for start in sorted(edges):
        if start in seen:
            continue
        part = {start}
        stack = [start]
        while stack:
            e = stack.pop()
            for x in e:
                for f in adj[x]:
                    if f not in part:
                        part.add(f)
                        stack.append(f)
        seen |= part
        parts.append(frozenset(part))
    return parts


def _matchings(edges: frozenset[Edge]) -> list[tuple[Edge, ...]]:
    out = []
    ordered = sorted(edges)
    for size in range(1, len(ordered) + 1):
        found = False
        for combo in itertools.combinations(ordered, size):
            ends = [x for e in combo for x in e]
            if len(set(ends)) == len(ends):
                out.append(combo)
                found = True
        if not found:
            break
    return out


def brute_force_budgeted(graph: FailureGraph, active: EdgeSet | None = None, n: int | None = 0) -> float:
    """Unmemoized expectimax over all matchings and all outcome patterns.

    ``n`` recourse observations are allowed after the first proposal
    (``None`` for unlimited).  Served weight is credited on every pattern,
    the residual accumulates removals from every observed edge, and no
    continuation is taken once the budget is spent.
    """
    table = _edge_table(graph, active)

    def solve_set(edges: frozenset[Edge], budget: int | None) -> float:
        return sum(best_in_component(part, budget) for part in _split(edges))

    def best_in_component(edges: frozenset[Edge], budget: int | None) -> float:
        return max(evaluate(m, edges, budget) for m in _matchings(edges))

    def evaluate(m: tuple[Edge, ...], edges: frozenset[Edge], budget: int | None) -> float:
        total = 0.0
        for outcome in itertools.product((False, True), repeat=len(m)):
            prob = 1.0
            gained = 0.0
            left = edges
            for e, ok in zip(m, outcome):
                p, w = table[e]
                if ok:
                    prob *= 1.0 - p
                    gained += w
                    left = _without_endpoints(left, *e)
                else:
                    prob *= p
                    left = left - {e}
            more = 0.0
            if left and (budget is None or budget > 0):
                more = solve_set(left, None if budget is None else budget - 1)
            total += prob * (gained + more)
        return total

    return solve_set(frozenset(table), n)


def trial_uniforms(seed: int, trial: int, size: int) -> np.ndarray:
    """Uniform draws for one Monte-Carlo trial.

    Philox4x64 keyed by ``seed`` with the counter's second 64-bit word set
    to ``trial``, so every ``(seed, trial)`` has its own reproducible stream
    regardless of how trials are scheduled.
    """
    bitgen = np.random.Philox(key=seed, counter=trial << 64)
    return np.random.Generator(bitgen).random(size)


def simulate_policy(
    graph: FailureGraph,
    budget: RecourseBudget | int | str | None,
    trials: int,
    seed: int = 0,
    active: EdgeSet | None = None,
) -> tuple[float, float]:
    """Play the solver's optimal policy against sampled edge outcomes.

    Each trial samples every edge's failure once up front (a failed edge
    stays failed and no edge is proposed twice), then repeatedly proposes
    the solver's first matchings on the current residual until the budget
    or the edges run out.

    Returns:
        ``(mean served weight, standard error of the mean)``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    b = as_budget(budget)
    start = graph.all_edges() if active is None else active
    policy: dict[tuple[int, int | None], tuple[list[int], EdgeSet]] = {}

    def decide(residual: EdgeSet, left: int | None) -> list[int]:
        key = (residual.mask, left)
        if key not in policy:
            result = solve(graph, residual, RecourseBudget(left))
            proposal = sorted(i for _, m in result.components for i in m)
            policy[key] = (proposal, residual)
        return policy[key][0]

    served = np.empty(trials)
    prob = np.asarray(graph.fail_prob)
    for t in range(trials):
        fails = trial_uniforms(seed, t, graph.edge_count) < prob
        residual, left, total = start, b.limit, 0.0
        while residual:
            proposal = decide(residual, left)
            ok = [i for i in proposal if not fails[i]]
            bad = [i for i in proposal if fails[i]]
            total += sum(graph.weight[i] for i in ok)
            residual = residual_after_pattern(residual, graph.edge_set(ok), graph.edge_set(bad))
            if left is not None:
                if left == 0:
                    break
                left -= 1
        served[t] = total
    mean = float(served.mean())
    stderr = float(served.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return mean, stderr
