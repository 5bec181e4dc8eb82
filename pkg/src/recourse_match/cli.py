"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from collections.abc import Iterator, Sequence
from typing import TextIO

from . import bench
from . import solver as _solver
from .graph import FailureGraph
from .instances import (
    FOLD_MODES,
    InstanceError,
    InstanceFile,
    fold_two_cycles,
    gen_complete,
    gen_cycle,
    gen_kep,
    gen_path,
    gen_random,
    instance_metadata,
    read_instance,
    write_instance,
)
from .solver import RecourseBudget, SolveTimeout

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class CliError(Exception):
    pass


@contextlib.contextmanager
def _output(path: str | None) -> Iterator[TextIO]:
    if path is None or path == "-":
        yield sys.stdout
        return
    try:
        fh = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}") from None
    with fh:
        yield fh


def _budget(text: str) -> RecourseBudget:
    try:
        return RecourseBudget.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _grid(text: str) -> list[float]:
    try:
        return bench.parse_grid(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _budget_list(text: str) -> list[RecourseBudget]:
    try:
        return bench.parse_budgets(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str) -> list[int]:
    try:
        return bench.parse_sizes(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _p_spec(args: argparse.Namespace) -> float | tuple[float, float]:
    return tuple(args.p_range) if args.p_range else args.p


def _load(path: str, fold: str) -> FailureGraph:
    try:
        inst = read_instance(path, fold=fold)
    except FileNotFoundError:
        raise CliError(f"instance file not found: {path}") from None
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    except InstanceError as exc:
        raise CliError(str(exc)) from None
    assert isinstance(inst.payload, FailureGraph)
    return inst.payload


def cmd_solve(args: argparse.Namespace) -> int:
    graph = _load(args.instance, args.fold)
    try:
        result = _solver.solve(graph, budget=args.budget, timeout=args.timeout, prune_zero=args.prune_zero)
    except SolveTimeout:
        raise CliError(f"no solution within {args.timeout} s") from None
    report = bench.SolveReport.from_result(args.instance, args.budget, result)
    with _output(args.out) as out:
        out.write((report.to_json() if args.json else report.to_text()) + "\n")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    rows = bench.sweep(args.topology, args.n, args.p_grid, args.budgets)
    with _output(args.out) as out:
        bench.write_sweep(rows, out)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    def progress(chunk: list[dict]) -> None:
        if args.verbose:
            row = chunk[0]
            marks = " ".join(f"N={r['budget']}:{'ok' if r['solved'] else 'timeout'}" for r in chunk)
            print(f"size {row['size']} instance {row['instance']} ({row['edges']} edges): {marks}", file=sys.stderr)

    rows = bench.bench(
        family=args.family,
        sizes=args.sizes,
        budgets=args.budgets,
        instances=args.instances,
        timeout=args.timeout,
        seed=args.seed,
        density=args.density,
        workers=args.workers,
        progress=progress,
    )
    with _output(args.out) as out:
        bench.write_bench(rows, out)
    table = bench.format_table(bench.success_table(rows), args.instances)
    if args.table_out:
        with _output(args.table_out) as out:
            out.write(table)
    else:
        sys.stderr.write(table)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    progress = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else None
    report = bench.verify(
        max_edges=args.max_edges,
        p_grid=args.p_grid,
        budgets=[b.limit for b in args.budgets if b.limit is not None],
        trials=args.trials,
        seed=args.seed,
        samples=args.samples,
        progress=progress,
    )
    for line in report.lines():
        print(line)
    if report.passed:
        return EXIT_OK
    if report.counterexample is not None:
        meta = {"source": "verify", "failure": report.failure or ""}
        write_instance(args.counterexample, InstanceFile(report.counterexample, meta))
        print(f"counterexample written to {args.counterexample}")
    return EXIT_FAIL


def cmd_gen(args: argparse.Namespace) -> int:
    spec = _p_spec(args)
    if args.kind == "kep":
        payload = gen_kep(args.n, args.density, seed=args.seed)
        meta = instance_metadata("kep", args.seed, n=args.n, density=args.density)
    elif args.kind == "random":
        payload = gen_random(args.n, args.density, spec, args.seed)
        meta = instance_metadata("random", args.seed, n=args.n, density=args.density, p=spec)
    else:
        make = {"cycle": gen_cycle, "complete": gen_complete, "path": gen_path}[args.kind]
        payload = make(args.n, spec, args.seed)
        meta = instance_metadata(args.kind, args.seed, n=args.n, p=spec)
    inst = InstanceFile(payload, meta)
    if args.out in (None, "-"):
        from .instances import format_instance

        sys.stdout.write(format_instance(inst))
    else:
        try:
            write_instance(args.out, inst)
        except OSError as exc:
            raise CliError(f"cannot write {args.out}: {exc.strerror}") from None
    return EXIT_OK


def cmd_convert(args: argparse.Namespace) -> int:
    try:
        inst = read_instance(args.instance)
    except FileNotFoundError:
        raise CliError(f"instance file not found: {args.instance}") from None
    except InstanceError as exc:
        raise CliError(str(exc)) from None
    if isinstance(inst.payload, FailureGraph):
        raise CliError(f"{args.instance} is already undirected")
    meta = dict(inst.metadata, fold=args.fold)
    out = InstanceFile(fold_two_cycles(inst.payload, args.fold), meta)
    try:
        write_instance(args.out, out)
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc.strerror}") from None
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recourse-match",
        description="Maximum-expectation matching with repeated recourse on graphs with unreliable edges.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance file")
    p.add_argument("instance")
    p.add_argument("--budget", type=_budget, default=_solver.UNLIMITED, help="recourse budget: n or inf (default inf)")
    p.add_argument("--fold", choices=FOLD_MODES, default="as-written", help="folding for directed instances")
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("--prune-zero", action="store_true", help="skip zero-probability failure patterns")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="value over a grid of uniform edge failure probabilities")
    p.add_argument("--topology", choices=sorted(bench.TOPOLOGIES), default="cycle")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--p-grid", type=_grid, default=bench.parse_grid("0:1:0.05"), help="lo:hi:step or comma list")
    p.add_argument("--budgets", type=_budget_list, default=bench.parse_budgets("0,inf"))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="timing and success counts on generated instances")
    p.add_argument("--family", choices=("kep", "random"), default="kep")
    p.add_argument("--sizes", type=_int_list, default=[10, 20, 30])
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--budgets", type=_budget_list, default=bench.parse_budgets("0,1,2,3,inf"))
    p.add_argument("--density", type=float, default=0.3, help="arc density (kep) or edge density (random)")
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="per-run CSV (default stdout)")
    p.add_argument("--table-out", default=None, help="success-count table (default stderr)")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="check the solver against the brute-force and Monte-Carlo oracles")
    p.add_argument("--max-edges", type=int, default=6)
    p.add_argument("--p-grid", type=_grid, default=bench.parse_grid("0,0.25,0.5,0.75,1"))
    p.add_argument("--budgets", type=_budget_list, default=bench.parse_budgets("0,1,2,3"))
    p.add_argument("--samples", type=int, default=200, help="probability assignments per topology")
    p.add_argument("--trials", type=int, default=100_000, help="Monte-Carlo trials; 0 skips that phase")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--counterexample", default="counterexample.rm")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="write a generated instance")
    p.add_argument("kind", choices=("cycle", "complete", "path", "random", "kep"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, default=0.5, help="constant edge failure probability")
    p.add_argument("--p-range", type=float, nargs=2, metavar=("LO", "HI"), help="uniform edge probability range")
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("convert", help="fold a directed instance into an undirected one")
    p.add_argument("instance")
    p.add_argument("--fold", choices=FOLD_MODES, default="as-written")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"recourse-match {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"recourse-match {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
