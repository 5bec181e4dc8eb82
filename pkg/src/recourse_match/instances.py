"""Instance generators, directed-to-undirected folding, and the text format.

File format (``recourse-match v1``)::

    recourse-match v1 undirected
    #@ generator cycle
    n 4
    e 0 1 0.5 2
    ...

    recourse-match v1 directed
    n 3
    v 0 0.10000000000000001
    a 0 1 0.29999999999999999

``#`` starts a comment; ``#@ key value`` comment lines carry provenance
metadata and survive a read/write round trip.  Probabilities are written
with 17 significant digits so that they read back bit-exactly.
"""

from __future__ import annotations

import itertools
import os
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .graph import FailureGraph, GraphError, build_graph

FORMAT_TAG = "recourse-match"
FORMAT_VERSION = "v1"
FOLD_MODES = ("as-written", "complement")

PSpec = Union[float, Sequence[float]]


class InstanceError(ValueError):
    """Problem reading an instance file; ``line`` is 1-based when known."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None, field: str | None = None):
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        if field is not None:
            where += f" [{field}]"
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.line = line
        self.field = field


class MalformedInstanceError(InstanceError):
    pass


class UnknownVersionError(InstanceError):
    pass


class InstanceRangeError(InstanceError):
    pass


@dataclass(frozen=True)
class DirectedInstance:
    """Directed compatibility graph with vertex and arc failure probabilities."""

    vertex_count: int
    vertex_fail_prob: tuple[float, ...]
    arcs: tuple[tuple[int, int, float], ...]

    def __post_init__(self) -> None:
        if len(self.vertex_fail_prob) != self.vertex_count:
            raise ValueError(
                f"expected {self.vertex_count} vertex probabilities, got {len(self.vertex_fail_prob)}"
            )
        for i, p in enumerate(self.vertex_fail_prob):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"failure probability {p!r} of vertex {i} is outside [0, 1]")
        seen = set()
        for i, j, p in self.arcs:
            if i == j:
                raise ValueError(f"self-arc at vertex {i}")
            if not (0 <= i < self.vertex_count and 0 <= j < self.vertex_count):
                raise ValueError(f"arc ({i},{j}) has an endpoint outside 0..{self.vertex_count - 1}")
            if (i, j) in seen:
                raise ValueError(f"duplicate arc ({i},{j})")
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"failure probability {p!r} of arc ({i},{j}) is outside [0, 1]")
            seen.add((i, j))


@dataclass
class InstanceFile:
    payload: FailureGraph | DirectedInstance
    metadata: dict[str, str] = field(default_factory=dict)
    version: str = FORMAT_VERSION

    @property
    def kind(self) -> str:
        return "directed" if isinstance(self.payload, DirectedInstance) else "undirected"


def fold_two_cycles(d: DirectedInstance, mode: str = "as-written") -> FailureGraph:
    """Collapse every 2-cycle ``i -> j -> i`` into one undirected edge.

    Other arcs are dropped.  In ``as-written`` mode the edge fails with
    probability ``p_i * p_j * p_ij * p_ji``; in ``complement`` mode it fails
    unless all four components survive.
    """
    if mode not in FOLD_MODES:
        raise ValueError(f"fold mode must be one of {FOLD_MODES}, got {mode!r}")
    arc = {(i, j): p for i, j, p in d.arcs}
    pv = d.vertex_fail_prob
    edges = []
    for (i, j), pij in arc.items():
        if i < j and (j, i) in arc:
            parts = (pv[i], pv[j], pij, arc[(j, i)])
            if mode == "as-written":
                p = parts[0] * parts[1] * parts[2] * parts[3]
            else:
                p = 1.0 - (1.0 - parts[0]) * (1.0 - parts[1]) * (1.0 - parts[2]) * (1.0 - parts[3])
            edges.append((i, j, p))
    return build_graph(d.vertex_count, edges)


def _draw(p_spec: PSpec, count: int, rng: np.random.Generator) -> list[float]:
    if isinstance(p_spec, (int, float)):
        p = float(p_spec)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability {p} is outside [0, 1]")
        return [p] * count
    lo, hi = (float(x) for x in p_spec)
    if not 0.0 <= lo <= hi <= 1.0:
        raise ValueError(f"probability range [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 1")
    return [float(x) for x in rng.uniform(lo, hi, count)]


def _from_pairs(n: int, pairs: list[tuple[int, int]], p_spec: PSpec, seed: int | None) -> FailureGraph:
    if n < 2:
        raise ValueError(f"need at least 2 vertices, got {n}")
    pairs = sorted((min(u, v), max(u, v)) for u, v in pairs)
    probs = _draw(p_spec, len(pairs), np.random.default_rng(seed))
    return build_graph(n, [(u, v, p) for (u, v), p in zip(pairs, probs)])


def gen_cycle(n: int, p_spec: PSpec = 0.5, seed: int | None = 0) -> FailureGraph:
    if n == 2:
        return _from_pairs(n, [(0, 1)], p_spec, seed)
    return _from_pairs(n, [(i, (i + 1) % n) for i in range(n)], p_spec, seed)


def gen_complete(n: int, p_spec: PSpec = 0.5, seed: int | None = 0) -> FailureGraph:
    return _from_pairs(n, list(itertools.combinations(range(n), 2)), p_spec, seed)


def gen_path(n: int, p_spec: PSpec = 0.5, seed: int | None = 0) -> FailureGraph:
    return _from_pairs(n, [(i, i + 1) for i in range(n - 1)], p_spec, seed)


def gen_random(n: int, edge_density: float, p_spec: PSpec = 0.5, seed: int | None = 0) -> FailureGraph:
    """Erdos-Renyi graph: each vertex pair is an edge with probability
    ``edge_density``; edge probabilities then follow ``p_spec``."""
    if not 0.0 <= edge_density <= 1.0:
        raise ValueError(f"edge density {edge_density} is outside [0, 1]")
    if n < 0:
        raise ValueError(f"vertex count must be nonnegative, got {n}")
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(pairs)) < edge_density
    chosen = [e for e, k in zip(pairs, keep) if k]
    probs = _draw(p_spec, len(chosen), rng)
    return build_graph(n, [(u, v, p) for (u, v), p in zip(chosen, probs)])


def gen_kep(
    n_pairs: int,
    arc_density: float = 0.3,
    vertex_p: PSpec = (0.0, 1.0),
    arc_p: PSpec = (0.0, 1.0),
    seed: int | None = 0,
) -> DirectedInstance:
    """Directed pool of incompatible pairs with uniformly drawn failure
    probabilities.  Each ordered pair gets an arc with probability
    ``arc_density``; compatibility structure (blood types, crossmatch) is not
    modelled."""
    if not 0.0 <= arc_density <= 1.0:
        raise ValueError(f"arc density {arc_density} is outside [0, 1]")
    rng = np.random.default_rng(seed)
    pv = _draw(vertex_p, n_pairs, rng)
    ordered = list(itertools.permutations(range(n_pairs), 2))
    keep = rng.random(len(ordered)) < arc_density
    chosen = [a for a, k in zip(ordered, keep) if k]
    pa = _draw(arc_p, len(chosen), rng)
    return DirectedInstance(n_pairs, tuple(pv), tuple((i, j, p) for (i, j), p in zip(chosen, pa)))


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def format_instance(inst: InstanceFile) -> str:
    lines = [f"{FORMAT_TAG} {inst.version} {inst.kind}"]
    for key, value in inst.metadata.items():
        if not key or any(c.isspace() for c in key) or "\n" in value:
            raise ValueError(f"metadata key {key!r} / value {value!r} cannot be written")
        lines.append(f"#@ {key} {value}")
    g = inst.payload
    lines.append(f"n {g.vertex_count}")
    if isinstance(g, DirectedInstance):
        lines += [f"v {i} {_fmt(p)}" for i, p in enumerate(g.vertex_fail_prob)]
        lines += [f"a {i} {j} {_fmt(p)}" for i, j, p in g.arcs]
    else:
        lines += [f"e {u} {v} {_fmt(p)} {_fmt(w)}" for (u, v), p, w in zip(g.edges, g.fail_prob, g.weight)]
    return "\n".join(lines) + "\n"


def write_instance(path: str | os.PathLike[str], inst: InstanceFile | FailureGraph | DirectedInstance) -> None:
    if not isinstance(inst, InstanceFile):
        inst = InstanceFile(inst)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_instance(inst))


def _number(text: str, kind: type, where: dict, fieldname: str) -> float:
    try:
        return kind(text)
    except ValueError:
        raise MalformedInstanceError(f"{fieldname} {text!r} is not a valid {kind.__name__}", field=fieldname, **where) from None


def _prob(text: str, where: dict, fieldname: str, what: str) -> float:
    p = _number(text, float, where, fieldname)
    if not 0.0 <= p <= 1.0:
        raise InstanceRangeError(f"failure probability {text} of {what} is outside [0, 1]", field=fieldname, **where)
    return p


def parse_instance(text: str, path: str | None = None) -> InstanceFile:
    """Parse the text format; see the module docstring."""
    lines = text.splitlines()
    metadata: dict[str, str] = {}
    header = None
    n = None
    edges: list[tuple[int, int, float, float]] = []
    edge_lines: list[int] = []
    vprobs: dict[int, float] = {}
    arcs: list[tuple[int, int, float]] = []
    for lineno, raw in enumerate(lines, 1):
        where = {"path": path, "line": lineno}
        stripped = raw.strip()
        if stripped.startswith("#@"):
            parts = stripped[2:].strip().split(None, 1)
            if parts:
                metadata[parts[0]] = parts[1] if len(parts) > 1 else ""
            continue
        stripped = stripped.split("#", 1)[0].strip()
        if not stripped:
            continue
        tok = stripped.split()
        if header is None:
            if len(tok) != 3 or tok[0] != FORMAT_TAG:
                raise MalformedInstanceError(f"expected header '{FORMAT_TAG} <version> <kind>'", field="header", **where)
            if tok[1] != FORMAT_VERSION:
                raise UnknownVersionError(f"unsupported format version {tok[1]!r}", field="version", **where)
            if tok[2] not in ("directed", "undirected"):
                raise MalformedInstanceError(f"unknown payload kind {tok[2]!r}", field="kind", **where)
            header = tok[2]
            continue
        tag = tok[0]
        if tag == "n":
            if n is not None or len(tok) != 2:
                raise MalformedInstanceError("expected a single 'n <vertex_count>' line", field="n", **where)
            n = int(_number(tok[1], int, where, "n"))
            if n < 0:
                raise InstanceRangeError(f"vertex count {n} is negative", field="n", **where)
            continue
        if n is None:
            raise MalformedInstanceError(f"'{tag}' line before 'n' line", field=tag, **where)
        if header == "undirected" and tag == "e":
            if len(tok) not in (4, 5):
                raise MalformedInstanceError("expected 'e <u> <v> <p> [w]'", field="e", **where)
            u = int(_number(tok[1], int, where, "u"))
            v = int(_number(tok[2], int, where, "v"))
            p = _prob(tok[3], where, "p", f"edge {{{u},{v}}}")
            w = _number(tok[4], float, where, "w") if len(tok) == 5 else 2.0
            edges.append((u, v, p, w))
            edge_lines.append(lineno)
        elif header == "directed" and tag == "v":
            if len(tok) != 3:
                raise MalformedInstanceError("expected 'v <i> <p_i>'", field="v", **where)
            i = int(_number(tok[1], int, where, "i"))
            if not 0 <= i < n or i in vprobs:
                raise MalformedInstanceError(f"vertex {i} out of range or repeated", field="i", **where)
            vprobs[i] = _prob(tok[2], where, "p_i", f"vertex {i}")
        elif header == "directed" and tag == "a":
            if len(tok) != 4:
                raise MalformedInstanceError("expected 'a <i> <j> <p_ij>'", field="a", **where)
            i = int(_number(tok[1], int, where, "i"))
            j = int(_number(tok[2], int, where, "j"))
            arcs.append((i, j, _prob(tok[3], where, "p_ij", f"arc ({i},{j})")))
        else:
            raise MalformedInstanceError(f"unexpected line tag {tag!r} in {header} payload", field="tag", **where)
    if header is None:
        raise MalformedInstanceError("empty instance file", path=path)
    if n is None:
        raise MalformedInstanceError("missing 'n <vertex_count>' line", path=path)
    if header == "undirected":
        try:
            payload: FailureGraph | DirectedInstance = build_graph(n, edges)
        except GraphError as exc:
            line = None
            if exc.edge is not None:
                # last occurrence: for duplicates that is the offending line
                hits = [ln for (u, v, *_), ln in zip(edges, edge_lines) if (min(u, v), max(u, v)) == exc.edge]
                line = hits[-1] if hits else None
            raise MalformedInstanceError(str(exc), path=path, line=line, field="e") from exc
    else:
        missing = [i for i in range(n) if i not in vprobs]
        if missing:
            raise MalformedInstanceError(f"missing 'v' lines for vertices {missing}", path=path, field="v")
        try:
            payload = DirectedInstance(n, tuple(vprobs[i] for i in range(n)), tuple(arcs))
        except ValueError as exc:
            raise MalformedInstanceError(str(exc), path=path, field="a") from exc
    return InstanceFile(payload, metadata, FORMAT_VERSION)


def read_instance(path: str | os.PathLike[str], fold: str | None = None) -> InstanceFile:
    """Read an instance file.  A directed payload is folded to an undirected
    graph only when ``fold`` names a mode."""
    with open(path, encoding="utf-8") as fh:
        inst = parse_instance(fh.read(), os.fspath(path))
    if fold is not None and isinstance(inst.payload, DirectedInstance):
        meta = dict(inst.metadata)
        meta["fold"] = fold
        return InstanceFile(fold_two_cycles(inst.payload, fold), meta, inst.version)
    return inst


def load_graph(path: str | os.PathLike[str], fold: str = "as-written") -> FailureGraph:
    graph = read_instance(path, fold=fold).payload
    assert isinstance(graph, FailureGraph)
    return graph


def instance_metadata(generator: str, seed: int | None, **params: object) -> dict[str, str]:
    meta = {"generator": generator}
    if seed is not None:
        meta["seed"] = str(seed)
    meta.update({k: ",".join(map(str, v)) if isinstance(v, (tuple, list)) else str(v) for k, v in params.items()})
    return meta

