"""Coupling graphs of physical qubits."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable


class ArchError(ValueError):
    pass


@dataclass(frozen=True)
class CouplingGraph:
    """Undirected simple connected graph; ``edges[k]`` is edge ``e_k``."""

    qubit_count: int
    edges: tuple[tuple[int, int], ...]
    kind: str = "custom"
    # original vertex ids when a file-supplied path was relabelled into a line
    labels: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.qubit_count < 1:
            raise ArchError("architecture needs at least one qubit")
        seen = set()
        for k, (a, b) in enumerate(self.edges):
            if a == b:
                raise ArchError(f"edge e{k} is a self-loop on p{a}")
            for p in (a, b):
                if not 0 <= p < self.qubit_count:
                    raise ArchError(f"edge e{k} endpoint p{p} out of range")
            key = frozenset((a, b))
            if key in seen:
                raise ArchError(f"duplicate edge ({a}, {b})")
            seen.add(key)
        if not _connected(self.qubit_count, self.edges):
            raise ArchError("coupling graph is not connected")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_index(self) -> dict[frozenset, int]:
        return {frozenset(e): k for k, e in enumerate(self.edges)}

    def edge_between(self, a: int, b: int) -> int | None:
        return self.edge_index.get(frozenset((a, b)))

    @cached_property
    def incident(self) -> tuple[tuple[int, ...], ...]:
        """Edge ids touching each physical qubit."""
        out: list[list[int]] = [[] for _ in range(self.qubit_count)]
        for k, (a, b) in enumerate(self.edges):
            out[a].append(k)
            out[b].append(k)
        return tuple(tuple(x) for x in out)

    @cached_property
    def adjacent_edges(self) -> tuple[tuple[int, ...], ...]:
        """For each edge, the other edges sharing an endpoint with it."""
        out = []
        for k, (a, b) in enumerate(self.edges):
            out.append(tuple(sorted({j for j in self.incident[a] + self.incident[b] if j != k})))
        return tuple(out)

    def degree(self, p: int) -> int:
        return len(self.incident[p])

    def to_dict(self) -> dict:
        d = {"qubits": self.qubit_count, "edges": [list(e) for e in self.edges]}
        if self.labels is not None:
            d["labels"] = list(self.labels)
        return d


def _connected(n: int, edges: Iterable[tuple[int, int]]) -> bool:
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {0}
    todo = deque([0])
    while todo:
        v = todo.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return len(seen) == n


def build_line(n: int) -> CouplingGraph:
    """Path graph with ``e_k = (p_k, p_{k+1})``."""
    if n < 2:
        raise ArchError(f"a line needs at least 2 qubits, got {n}")
    return CouplingGraph(n, tuple((k, k + 1) for k in range(n - 1)), "line")


def build_grid(rows: int, cols: int) -> CouplingGraph:
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ArchError(f"invalid grid dimensions {rows}x{cols}")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return CouplingGraph(rows * cols, tuple(edges), "grid")


def build_sycamore_like(rows: int, cols: int) -> CouplingGraph:
    """Diagonal lattice approximating a patch of a Sycamore-style chip.

    Vertex ``(r, c)`` is ``r * cols + c``.  Each vertex couples straight down
    and to one diagonal neighbour in the next row (right on even rows, left
    on odd rows), so no vertex has degree above 4.
    """
    if rows < 2 or cols < 1:
        raise ArchError(f"invalid sycamore-like dimensions {rows}x{cols}")
    edges = []
    for r in range(rows - 1):
        for c in range(cols):
            v = r * cols + c
            edges.append((v, v + cols))
            if r % 2 == 0 and c + 1 < cols:
                edges.append((v, v + cols + 1))
            if r % 2 == 1 and c >= 1:
                edges.append((v, v + cols - 1))
    return CouplingGraph(rows * cols, tuple(edges), "sycamore-like")


def as_line(n: int, edges: Iterable[Iterable[int]]) -> CouplingGraph | None:
    """Relabel a path graph into canonical line indexing, else None."""
    edges = [tuple(e) for e in edges]
    if n < 2 or len(edges) != n - 1:
        return None
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        if not (0 <= a < n and 0 <= b < n) or a == b:
            return None
        adj[a].append(b)
        adj[b].append(a)
    if any(len(x) > 2 for x in adj):
        return None
    ends = sorted(v for v in range(n) if len(adj[v]) == 1)
    if len(ends) != 2:
        return None
    order = [ends[0]]
    prev = -1
    while len(order) < n:
        nxt = [w for w in adj[order[-1]] if w != prev]
        if not nxt:
            return None
        prev = order[-1]
        order.append(nxt[0])
    line = build_line(n)
    if order == list(range(n)):
        return line
    return CouplingGraph(n, line.edges, "line", tuple(order))


def parse_arch(data: dict) -> CouplingGraph:
    """Build a graph from the JSON architecture format.

    Any path graph is canonicalised into line indexing so the line-only
    reductions apply to it; ``labels`` then records the file's vertex ids.
    """
    try:
        n = int(data["qubits"])
        edges = [tuple(int(x) for x in e) for e in data["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ArchError(f"malformed architecture: {exc}") from exc
    for e in edges:
        if len(e) != 2:
            raise ArchError(f"edge {list(e)} must have two endpoints")
    line = as_line(n, edges)
    if line is not None:
        return line
    return CouplingGraph(n, tuple(edges), "custom")


def load_arch(path: str | Path) -> CouplingGraph:
    return parse_arch(json.loads(Path(path).read_text()))


def arch_from_spec(spec: str) -> CouplingGraph:
    """Parse ``line:5``, ``grid:2x3``, ``sycamore:3x4`` or ``file:path``."""
    kind, _, arg = spec.partition(":")
    if not arg:
        raise ArchError(f"architecture spec {spec!r} needs the form kind:args")
    try:
        if kind == "line":
            return build_line(int(arg))
        if kind in ("grid", "sycamore"):
            r, _, c = arg.lower().partition("x")
            rows, cols = int(r), int(c)
            return build_grid(rows, cols) if kind == "grid" else build_sycamore_like(rows, cols)
    except ValueError as exc:
        if isinstance(exc, ArchError):
            raise
        raise ArchError(f"bad architecture spec {spec!r}") from exc
    if kind == "file":
        return load_arch(arg)
    raise ArchError(f"unknown architecture kind {kind!r}")


def is_matching(g: CouplingGraph, edge_ids: Iterable[int]) -> bool:
    """True iff no two of the given edges share an endpoint."""
    used = set()
    for k in set(edge_ids):
        if not 0 <= k < g.edge_count:
            raise ArchError(f"unknown edge id {k}")
        a, b = g.edges[k]
        if a in used or b in used:
            return False
        used.update((a, b))
    return True


def line_parity_classes(g: CouplingGraph) -> tuple[frozenset[int], frozenset[int]]:
    """Even and odd edge ids of a line."""
    if g.kind != "line":
        raise ArchError(f"parity classes need a line architecture, got {g.kind}")
    even = frozenset(k for k in range(g.edge_count) if k % 2 == 0)
    odd = frozenset(k for k in range(g.edge_count) if k % 2 == 1)
    return even, odd
