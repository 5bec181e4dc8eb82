"""Experiment drivers behind the CLI: probability sweeps, timing/success
benchmarks, and the solver-vs-oracle verification suite.

CSV outputs start with a ``# schema: <name>`` comment line; read them with
``pandas.read_csv(path, comment="#")`` or skip the first line.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import solver as _solver
from .graph import FailureGraph, build_graph
from .instances import fold_two_cycles, gen_complete, gen_cycle, gen_kep, gen_path, gen_random
from .oracle import brute_force_budgeted, brute_force_unlimited, simulate_policy
from .solver import UNLIMITED, RecourseBudget, SolveResult, SolveTimeout, as_budget

SWEEP_SCHEMA = "recourse-match/sweep/1"
BENCH_SCHEMA = "recourse-match/bench/1"
TABLE_SCHEMA = "recourse-match/success-table/1"
REPORT_SCHEMA = "recourse-match/solve-report/1"

SWEEP_COLUMNS = ["topology", "n", "p", "budget", "value"]
BENCH_COLUMNS = [
    "family", "size", "instance", "seed", "vertices", "edges",
    "budget", "solved", "elapsed_s", "value", "evaluate_calls",
]

TOPOLOGIES: dict[str, Callable[..., FailureGraph]] = {
    "cycle": gen_cycle,
    "complete": gen_complete,
    "path": gen_path,
}


def parse_grid(text: str) -> list[float]:
    """``"0:1:0.05"`` (inclusive range) or ``"0,0.25,0.5"``."""
    text = text.strip()
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        if step <= 0 or hi < lo:
            raise ValueError(f"bad range {text!r}: need lo <= hi and step > 0")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        grid = [round(lo + i * step, 12) for i in range(count)]
    else:
        grid = [float(x) for x in text.split(",") if x.strip()]
    if not grid:
        raise ValueError("empty probability grid")
    bad = [p for p in grid if not 0.0 <= p <= 1.0]
    if bad:
        raise ValueError(f"grid values outside [0, 1]: {bad}")
    return grid


def parse_budgets(text: str) -> list[RecourseBudget]:
    return [RecourseBudget.parse(x) for x in text.split(",") if x.strip()]


def parse_sizes(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _write_csv(rows: Iterable[dict], columns: Sequence[str], schema: str, out: io.TextIOBase) -> None:
    out.write(f"# schema: {schema}\n")
    writer = csv.DictWriter(out, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


# -- solve report ---------------------------------------------------------

@dataclass
class SolveReport:
    instance: str
    budget: str
    value: float
    components: list[dict] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    schema: str = REPORT_SCHEMA

    @classmethod
    def from_result(cls, instance: str, budget: RecourseBudget, result: SolveResult) -> SolveReport:
        comps = [
            {"vertices": sorted(verts), "matching": [list(e) for e in m.pairs()]}
            for verts, m in result.components
        ]
        stats = {
            "memo_hits": result.stats.memo_hits,
            "evaluate_calls": result.stats.evaluate_calls,
            "elapsed_s": result.stats.elapsed,
        }
        return cls(instance, str(budget), result.value, comps, stats)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> SolveReport:
        data = json.loads(text)
        if data.get("schema") != REPORT_SCHEMA:
            raise ValueError(f"not a solve report: schema {data.get('schema')!r}")
        return cls(**data)

    def to_text(self) -> str:
        lines = [f"instance: {self.instance}", f"budget:   {self.budget}", f"value:    {self.value!r}"]
        for comp in self.components:
            pairs = " ".join(f"{u}-{v}" for u, v in comp["matching"])
            lines.append(f"component {comp['vertices']}: first matching {pairs}")
        s = self.stats
        lines.append(
            f"memo hits {s['memo_hits']}, evaluate calls {s['evaluate_calls']}, "
            f"elapsed {s['elapsed_s']:.6f} s"
        )
        return "\n".join(lines)


# -- probability sweep ----------------------------------------------------

def sweep(
    topology: str,
    n: int,
    p_grid: Sequence[float],
    budgets: Sequence[RecourseBudget | int | str | None],
) -> list[dict]:
    """One solve per ``(p, budget)`` cell with every edge at failure probability ``p``."""
    if topology not in TOPOLOGIES:
        raise ValueError(f"topology must be one of {sorted(TOPOLOGIES)}, got {topology!r}")
    make = TOPOLOGIES[topology]
    rows = []
    for p in p_grid:
        graph = make(n, float(p))
        for b in map(as_budget, budgets):
            rows.append({"topology": topology, "n": n, "p": p, "budget": str(b),
                         "value": _solver.solve(graph, budget=b).value})
    return rows


def write_sweep(rows: Iterable[dict], out: io.TextIOBase) -> None:
    _write_csv(rows, SWEEP_COLUMNS, SWEEP_SCHEMA, out)


# -- timing / success benchmark -------------------------------------------

def instance_seed(seed: int, size: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, size, index]).generate_state(1)[0])


def make_instance(family: str, size: int, seed: int, density: float, fold: str = "as-written") -> FailureGraph:
    """``kep``: directed pool of ``size`` pairs, 2-cycles folded; ``random``:
    Erdos-Renyi graph on ``size`` vertices with uniform edge probabilities."""
    if family == "kep":
        return fold_two_cycles(gen_kep(size, density, seed=seed), fold)
    if family == "random":
        return gen_random(size, density, (0.0, 1.0), seed)
    raise ValueError(f"unknown family {family!r}; use 'kep' or 'random'")


def _bench_task(args: tuple) -> list[dict]:
    family, size, index, seed, density, budgets, timeout = args
    iseed = instance_seed(seed, size, index)
    graph = make_instance(family, size, iseed, density)
    touched = sum(1 for mask in graph.incident if mask)
    rows = []
    for text in budgets:
        b = RecourseBudget.parse(text)
        row = {"family": family, "size": size, "instance": index, "seed": iseed,
               "vertices": touched, "edges": graph.edge_count, "budget": str(b)}
        t0 = time.perf_counter()
        try:
            res = _solver.solve(graph, budget=b, timeout=timeout)
        except SolveTimeout:
            row.update(solved=0, elapsed_s=round(time.perf_counter() - t0, 6), value="", evaluate_calls="")
        else:
            row.update(solved=1, elapsed_s=round(res.stats.elapsed, 6), value=repr(res.value),
                       evaluate_calls=res.stats.evaluate_calls)
        rows.append(row)
    return rows


def bench(
    family: str = "kep",
    sizes: Sequence[int] = (10, 20, 30),
    budgets: Sequence[RecourseBudget | int | str | None] = (0, 1, 2, 3, UNLIMITED),
    instances: int = 10,
    timeout: float = 60.0,
    seed: int = 0,
    density: float = 0.3,
    workers: int = 1,
    progress: Callable[[list[dict]], None] | None = None,
) -> list[dict]:
    """Solve every generated instance at every budget under a per-solve timeout.

    Instances are pure functions of ``(seed, size, index)``.  Rows come back
    ordered by size, instance, then budget, whatever the worker count.
    """
    if timeout <= 0:
        raise ValueError("timeout must be positive")
    labels = [str(as_budget(b)) for b in budgets]
    tasks = [(family, size, i, seed, density, labels, timeout) for size in sizes for i in range(instances)]
    rows: list[dict] = []
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            for chunk in pool.map(_bench_task, tasks):
                rows.extend(chunk)
                if progress:
                    progress(chunk)
    else:
        for task in tasks:
            chunk = _bench_task(task)
            rows.extend(chunk)
            if progress:
                progress(chunk)
    return rows


def success_table(rows: Iterable[dict]) -> dict[int, dict[str, int]]:
    """Solved counts per size and budget, in first-seen order."""
    table: dict[int, dict[str, int]] = {}
    for row in rows:
        cell = table.setdefault(int(row["size"]), {})
        cell[row["budget"]] = cell.get(row["budget"], 0) + int(row["solved"])
    return table


def write_bench(rows: Iterable[dict], out: io.TextIOBase) -> None:
    _write_csv(rows, BENCH_COLUMNS, BENCH_SCHEMA, out)


def format_table(table: dict[int, dict[str, int]], instances: int) -> str:
    budgets = list(next(iter(table.values()), {}))
    head = ["size"] + [f"N={b}" for b in budgets]
    lines = [f"# schema: {TABLE_SCHEMA} (solved out of {instances})", ",".join(head)]
    for size, cells in table.items():
        lines.append(",".join([str(size)] + [str(cells[b]) for b in budgets]))
    return "\n".join(lines) + "\n"


# -- verification ---------------------------------------------------------

def small_graphs(max_vertices: int = 6, max_edges: int = 6) -> list[FailureGraph]:
    """Every graph with 1..max_edges edges and no isolated vertex on at most
    ``max_vertices`` vertices, one per isomorphism class.

    Drawn from the networkx graph atlas, which covers graphs up to 7 vertices.
    """
    if max_vertices > 7:
        raise ValueError("the graph atlas only covers graphs with up to 7 vertices")
    import networkx as nx

    out = []
    for g in nx.graph_atlas_g():
        if g.number_of_nodes() > max_vertices or not 0 < g.number_of_edges() <= max_edges:
            continue
        if any(d == 0 for _, d in g.degree()):
            continue
        out.append(build_graph(g.number_of_nodes(), [(u, v, 0.5) for u, v in g.edges()]))
    return out


def probability_assignments(
    edge_count: int, p_grid: Sequence[float], samples: int, rng: np.random.Generator
) -> list[tuple[float, ...]]:
    """All grid assignments if there are at most ``samples``, otherwise
    ``samples`` distinct random ones."""
    total = len(p_grid) ** edge_count
    if total <= samples:
        return list(itertools.product(p_grid, repeat=edge_count))
    picks: set[int] = set()
    while len(picks) < samples:
        picks.add(int(rng.integers(total)))
    out = []
    for code in sorted(picks):
        digits = []
        for _ in range(edge_count):
            code, r = divmod(code, len(p_grid))
            digits.append(p_grid[r])
        out.append(tuple(digits))
    return out


@dataclass
class VerifyReport:
    passed: bool = True
    graphs: int = 0
    comparisons: int = 0
    monte_carlo: list[dict] = field(default_factory=list)
    monte_carlo_skipped: bool = False
    failure: str | None = None
    counterexample: FailureGraph | None = None

    def lines(self) -> list[str]:
        out = [f"exhaustive sweep: {self.graphs} graphs, {self.comparisons} solver/oracle comparisons"]
        if self.monte_carlo_skipped:
            out.append("monte carlo: skipped (trials=0)")
        for mc in self.monte_carlo:
            out.append(
                f"monte carlo {mc['graph']} p={mc['p']}: mean {mc['mean']:.6f} +- {mc['stderr']:.6f} "
                f"vs {mc['value']:.6f} ({'ok' if mc['ok'] else 'FAIL'}{', rerun' if mc['rerun'] else ''})"
            )
        out.append("PASS" if self.passed else f"FAIL: {self.failure}")
        return out


def verify(
    max_edges: int = 6,
    p_grid: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0),
    budgets: Sequence[int] = (0, 1, 2, 3),
    trials: int = 100_000,
    seed: int = 0,
    samples: int = 200,
    max_vertices: int = 6,
    tol: float = 1e-9,
    progress: Callable[[str], None] | None = None,
) -> VerifyReport:
    """Compare the solver with both brute-force oracles on every small graph,
    then check the solver's value against a Monte-Carlo run of its policy on
    C4 and K4.  Stops at the first disagreement."""
    if max_edges > 6:
        raise ValueError("the exhaustive sweep is limited to max_edges <= 6")
    rng = np.random.default_rng(seed)
    report = VerifyReport()
    for topo in small_graphs(max_vertices, max_edges):
        report.graphs += 1
        for probs in probability_assignments(topo.edge_count, p_grid, samples, rng):
            graph = topo.with_probabilities(probs)
            checks = [("inf", _solver.solve(graph, budget=UNLIMITED).value, brute_force_unlimited(graph))]
            for n in budgets:
                checks.append((str(n), _solver.solve(graph, budget=n).value, brute_force_budgeted(graph, None, n)))
            for label, got, want in checks:
                report.comparisons += 1
                if not abs(got - want) <= tol:
                    report.passed = False
                    report.failure = (
                        f"budget {label}: solver {got!r} != oracle {want!r} on edges "
                        f"{list(zip(graph.edges, graph.fail_prob))}"
                    )
                    report.counterexample = graph
                    return report
        if progress:
            progress(f"graph {report.graphs}: {topo.edge_count} edges ok")
    if trials <= 0:
        report.monte_carlo_skipped = True
        return report
    for name, make in (("C4", gen_cycle), ("K4", gen_complete)):
        for p in (0.2, 0.5, 0.8):
            graph = make(4, p)
            value = _solver.solve(graph, budget=UNLIMITED).value
            mean, se = simulate_policy(graph, UNLIMITED, trials, seed)
            rerun = False
            if abs(mean - value) > 3 * se:
                rerun = True
                mean, se = simulate_policy(graph, UNLIMITED, trials, seed + 1)
            ok = abs(mean - value) <= 3 * se
            report.monte_carlo.append(
                {"graph": name, "p": p, "mean": mean, "stderr": se, "value": value, "ok": ok, "rerun": rerun}
            )
            if not ok:
                report.passed = False
                report.failure = f"monte carlo on {name} p={p}: mean {mean} vs value {value} (se {se})"
                report.counterexample = graph
                return report
    return report
