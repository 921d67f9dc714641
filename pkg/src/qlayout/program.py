"""Quantum programs as lists of two-qubit gates.

A program carries its gates in source order plus a partition of the gate
list into contiguous commuting groups.  Inside a group every gate commutes
with every other gate, so two gates that share a qubit only need distinct
time steps; across groups the source order on a shared qubit is strict.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence


class ProgramError(ValueError):
    """Raised for malformed program input."""


@dataclass(frozen=True)
class Gate:
    id: int
    operands: tuple[int, int]
    label: str | None = None
    params: tuple[float, ...] = ()

    @property
    def qubits(self) -> tuple[int, int]:
        return self.operands


@dataclass(frozen=True)
class Program:
    qubit_count: int
    gates: tuple[Gate, ...]
    commuting_groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        _validate(self)

    @property
    def gate_count(self) -> int:
        return len(self.gates)

    def group_of(self) -> list[int]:
        """Group index for every gate id."""
        out = [0] * len(self.gates)
        for k, grp in enumerate(self.commuting_groups):
            for g in grp:
                out[g] = k
        return out

    def pairs(self) -> list[tuple[int, int]]:
        return [g.operands for g in self.gates]

    def reversed(self) -> "Program":
        """The program with gate order (and group order) mirrored."""
        n = len(self.gates)
        gates = tuple(
            Gate(n - 1 - g.id, g.operands, g.label, g.params) for g in reversed(self.gates)
        )
        groups = tuple(
            tuple(sorted(n - 1 - g for g in grp)) for grp in reversed(self.commuting_groups)
        )
        return Program(self.qubit_count, gates, groups)

    def to_dict(self) -> dict:
        gates = []
        for g in self.gates:
            d: dict = {"id": g.id, "q": list(g.operands)}
            if g.label is not None:
                d["label"] = g.label
            if g.params:
                d["params"] = list(g.params)
            gates.append(d)
        return {
            "qubits": self.qubit_count,
            "gates": gates,
            "commuting_groups": [list(grp) for grp in self.commuting_groups],
        }


@dataclass(frozen=True)
class DependencyGraph:
    """Ordering constraints between gates.

    ``precedence`` holds ``(g, h)`` meaning ``t_g < t_h``; ``distinct_time``
    holds ``(g, h)`` with ``g < h`` meaning ``t_g != t_h``.
    """

    precedence: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    distinct_time: frozenset[tuple[int, int]] = field(default_factory=frozenset)


def _validate(p: Program) -> None:
    if p.qubit_count < 2:
        raise ProgramError(f"a program needs at least 2 qubits, got {p.qubit_count}")
    if not p.gates:
        raise ProgramError("program has no gates")
    for i, g in enumerate(p.gates):
        if g.id != i:
            raise ProgramError(f"gate ids must be dense and ordered; position {i} has id {g.id}")
        if len(g.operands) != 2:
            raise ProgramError(f"gate {g.id} must act on exactly two qubits")
        a, b = g.operands
        for q in (a, b):
            if not 0 <= q < p.qubit_count:
                raise ProgramError(f"gate {g.id}: operand q{q} out of range 0..{p.qubit_count - 1}")
        if a == b:
            raise ProgramError(f"gate {g.id}: operands must be distinct, got (q{a}, q{b})")
    expected = 0
    for grp in p.commuting_groups:
        if not grp:
            raise ProgramError("empty commuting group")
        if list(grp) != list(range(expected, expected + len(grp))):
            raise ProgramError(
                f"commuting groups must partition the gate list into contiguous runs; got {list(grp)}"
            )
        expected += len(grp)
    if expected != len(p.gates):
        raise ProgramError("commuting groups do not cover every gate exactly once")


def make_program(
    qubit_count: int,
    pairs: Iterable[Sequence[int]],
    groups: Iterable[Iterable[int]] | None = None,
    *,
    commuting: bool = False,
    label: str | None = None,
) -> Program:
    """Build a program from operand pairs.

    With ``groups`` omitted, ``commuting=True`` puts every gate in one group
    and ``commuting=False`` gives each gate its own group.
    """
    gates = tuple(Gate(i, (int(a), int(b)), label) for i, (a, b) in enumerate(pairs))
    if groups is None:
        if commuting and gates:
            grp = (tuple(range(len(gates))),)
        else:
            grp = tuple((i,) for i in range(len(gates)))
    else:
        grp = tuple(tuple(int(g) for g in gg) for gg in groups)
    return Program(int(qubit_count), gates, grp)


def parse_program(text: str) -> Program:
    """Parse the JSON program format.

    Raises:
        ProgramError: on malformed text, out-of-range operands, duplicate
            operands or single-qubit gates.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProgramError(f"program is not valid JSON: {exc}") from exc
    return program_from_dict(data)


def program_from_dict(data: dict) -> Program:
    if not isinstance(data, dict):
        raise ProgramError("program must be a JSON object")
    for key in ("qubits", "gates"):
        if key not in data:
            raise ProgramError(f"program is missing field {key!r}")
    n = data["qubits"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise ProgramError("'qubits' must be an integer")
    raw = data["gates"]
    if not isinstance(raw, list):
        raise ProgramError("'gates' must be an array")
    gates = []
    for pos, item in enumerate(raw):
        if not isinstance(item, dict) or "q" not in item:
            raise ProgramError(f"gate entry {pos} must be an object with a 'q' field")
        q = item["q"]
        if not isinstance(q, list) or not all(isinstance(x, int) for x in q):
            raise ProgramError(f"gate entry {pos}: 'q' must be an integer array")
        if len(q) == 1:
            raise ProgramError(
                f"gate entry {pos}: single-qubit gates are not accepted; strip them before mapping"
            )
        if len(q) != 2:
            raise ProgramError(f"gate entry {pos}: expected two operands, got {len(q)}")
        gid = item.get("id", pos)
        params = item.get("params") or ()
        try:
            params = tuple(float(x) for x in params)
        except (TypeError, ValueError) as exc:
            raise ProgramError(f"gate entry {pos}: params must be numbers") from exc
        gates.append(Gate(gid, (q[0], q[1]), item.get("label"), params))
    groups = data.get("commuting_groups")
    if groups is None:
        groups = [[g.id] for g in gates]
    if not isinstance(groups, list) or not all(isinstance(g, list) for g in groups):
        raise ProgramError("'commuting_groups' must be an array of arrays")
    return Program(n, tuple(gates), tuple(tuple(g) for g in groups))


def load_program(path: str | Path) -> Program:
    return parse_program(Path(path).read_text())


def dependencies(p: Program) -> DependencyGraph:
    """Derive ordering constraints from shared qubits.

    Gates in one commuting group that share a qubit get a distinct-time
    pair; gates in different groups that share a qubit get a precedence
    pair in source order.  Gates on disjoint qubits are unconstrained.
    """
    group = p.group_of()
    prec = set()
    dist = set()
    for i, gi in enumerate(p.gates):
        qi = set(gi.operands)
        for j in range(i + 1, len(p.gates)):
            if qi.isdisjoint(p.gates[j].operands):
                continue
            if group[i] == group[j]:
                dist.add((i, j))
            else:
                prec.add((i, j))
    return DependencyGraph(frozenset(prec), frozenset(dist))


def longest_chain(d: DependencyGraph, gate_count: int) -> int:
    """Number of gates on the longest precedence chain."""
    preds: list[list[int]] = [[] for _ in range(gate_count)]
    for a, b in d.precedence:
        preds[b].append(a)
    level = [1] * gate_count
    # precedence pairs always point forward in gate order
    for g in range(gate_count):
        for a in preds[g]:
            level[g] = max(level[g], level[a] + 1)
    return max(level, default=0)


def depth_lower_bound(d: DependencyGraph, p: Program) -> int:
    per_qubit = [0] * p.qubit_count
    for g in p.gates:
        for q in g.operands:
            per_qubit[q] += 1
    return max(1, longest_chain(d, p.gate_count), max(per_qubit))


def repeated_pairs(p: Program) -> bool:
    """True if some unordered operand pair occurs in more than one gate."""
    seen = set()
    for g in p.gates:
        key = frozenset(g.operands)
        if key in seen:
            return True
        seen.add(key)
    return False
