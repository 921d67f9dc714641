"""Exhaustive state-space search over schedules.

This is an independent oracle: it re-states the mapping rules as a
transition system over ``(mapping, executed gates)`` and never looks at the
constraint clauses.  Each step places a set of ready, qubit-disjoint gates
on the edges their operands currently occupy, optionally absorbs a SWAP
into some of them, adds explicit SWAPs on a matching of untouched edges,
and moves to the swapped mapping.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterator, Sequence

from ..arch import CouplingGraph
from ..encode import forbidden_slots
from ..program import Program, dependencies
from ..solution import MappingSolution, apply_swaps

DEFAULT_QUBIT_CAP = 4
DEFAULT_MAX_T = 6


class CapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class ExhaustiveResult:
    depth: int
    swaps: int
    solution: MappingSolution


@dataclass(frozen=True)
class _Move:
    gates: tuple[tuple[int, int], ...]  # (gate, edge)
    absorbed: tuple[int, ...]
    explicit: tuple[int, ...]


class _Space:
    def __init__(self, p: Program, g: CouplingGraph, absorption: bool, phase: int | None, horizon: int):
        self.p = p
        self.g = g
        self.absorption = absorption
        deps = dependencies(p)
        self.preds = [0] * p.gate_count
        for a, b in deps.precedence:
            self.preds[b] |= 1 << a
        self.full = (1 << p.gate_count) - 1
        self.closed = set(forbidden_slots(g, horizon, phase)) if phase is not None else set()

    def moves(self, pos: tuple[int, ...], done: int, t: int, budget: int) -> Iterator[tuple[_Move, tuple[int, ...], int]]:
        g, p = self.g, self.p
        ready = []
        for gi, gate in enumerate(p.gates):
            if done >> gi & 1 or self.preds[gi] & ~done:
                continue
            a, b = gate.operands
            e = g.edge_between(pos[a], pos[b])
            if e is not None and (t, e) not in self.closed:
                ready.append((gi, e))
        occupied = set(pos)
        for chosen in _disjoint_subsets(ready, p):
            used = set()
            for _, e in chosen:
                used.update(g.edges[e])
            free_edges = [
                k for k, (u, v) in enumerate(g.edges)
                if u not in used and v not in used and (t, k) not in self.closed
                # a SWAP between two empty sites changes nothing
                and (u in occupied or v in occupied)
            ]
            gate_edges = [e for _, e in chosen]
            new_done = done
            for gi, _ in chosen:
                new_done |= 1 << gi
            absorb_options = _subsets(gate_edges) if self.absorption else [()]
            for absorbed in absorb_options:
                for explicit in _matchings(free_edges, g, budget):
                    move = _Move(tuple(chosen), absorbed, explicit)
                    yield move, apply_swaps(pos, g, absorbed + explicit), new_done


def _subsets(xs: Sequence[int]) -> list[tuple[int, ...]]:
    out = []
    for r in range(len(xs) + 1):
        out.extend(combinations(xs, r))
    return out


def _disjoint_subsets(ready: list[tuple[int, int]], p: Program) -> Iterator[tuple[tuple[int, int], ...]]:
    def rec(i: int, qubits: frozenset, acc: tuple):
        if i == len(ready):
            yield acc
            return
        yield from rec(i + 1, qubits, acc)
        gi, e = ready[i]
        ops = p.gates[gi].operands
        if qubits.isdisjoint(ops):
            yield from rec(i + 1, qubits | set(ops), acc + ((gi, e),))

    yield from rec(0, frozenset(), ())


def _matchings(edges: list[int], g: CouplingGraph, budget: int) -> Iterator[tuple[int, ...]]:
    def rec(i: int, used: frozenset, acc: tuple):
        yield acc
        if len(acc) >= budget:
            return
        for j in range(i, len(edges)):
            u, v = g.edges[edges[j]]
            if u in used or v in used:
                continue
            yield from rec(j + 1, used | {u, v}, acc + (edges[j],))

    yield from rec(0, frozenset(), ())


def _initial_states(p: Program, g: CouplingGraph, initial_mapping: Sequence[int] | None) -> list[tuple[int, ...]]:
    if initial_mapping is not None:
        return [tuple(initial_mapping)]
    return list(permutations(range(g.qubit_count), p.qubit_count))


def _levels(p, g, horizon, absorption, initial_mapping, phase, budget, stop_when_complete):
    """Layered dynamic programme; yields ``(t, layer)`` after each step.

    ``layer`` maps state -> (explicit SWAPs so far, parent state, move).
    """
    space = _Space(p, g, absorption, phase, horizon)
    layer = {(pos, 0): (0, None, None) for pos in _initial_states(p, g, initial_mapping)}
    yield 0, layer, space
    for t in range(horizon):
        nxt: dict = {}
        for (pos, done), (cost, _, _) in layer.items():
            for move, new_pos, new_done in space.moves(pos, done, t, budget - cost):
                c = cost + len(move.explicit)
                key = (new_pos, new_done)
                old = nxt.get(key)
                if old is None or c < old[0]:
                    nxt[key] = (c, (pos, done), move)
        layer = nxt
        yield t + 1, layer, space
        if stop_when_complete and any(done == space.full for _, done in layer):
            return


def _witness(history: list[dict], final: tuple, g: CouplingGraph, n_gates: int) -> MappingSolution:
    steps = len(history) - 1
    states = [final]
    moves = []
    for t in range(steps, 0, -1):
        _, parent, move = history[t][states[-1]]
        moves.append(move)
        states.append(parent)
    states.reverse()
    moves.reverse()
    placements = [None] * n_gates
    absorbed = set()
    explicit = set()
    for t, move in enumerate(moves):
        for gi, e in move.gates:
            placements[gi] = (t, e)
        absorbed.update((e, t) for e in move.absorbed)
        explicit.update((e, t) for e in move.explicit)
    return MappingSolution(
        horizon=steps,
        mapping=tuple(pos for pos, _ in states[:steps]),
        placements=tuple(placements),
        absorbed=frozenset(absorbed),
        explicit=frozenset(explicit),
    )


def _check_caps(p: Program, horizon: int, qubit_cap: int, max_t: int) -> None:
    if p.qubit_count > qubit_cap:
        raise CapExceeded(f"{p.qubit_count} program qubits exceed the exhaustive cap of {qubit_cap}")
    if horizon > max_t:
        raise CapExceeded(f"horizon {horizon} exceeds the exhaustive cap of {max_t}")


def min_swaps_within(
    p: Program,
    g: CouplingGraph,
    horizon: int,
    *,
    absorption: bool = True,
    initial_mapping: Sequence[int] | None = None,
    phase: int | None = None,
    swap_budget: int | None = None,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
    t_cap: int = DEFAULT_MAX_T,
) -> MappingSolution | None:
    """Fewest-SWAP schedule within ``horizon`` steps, or None if none fits.

    The returned solution spans the full horizon (idle steps included).
    """
    _check_caps(p, horizon, qubit_cap, t_cap)
    if p.qubit_count > g.qubit_count or horizon < 1:
        return None
    budget = swap_budget if swap_budget is not None else 2 * horizon * g.edge_count
    history = []
    for _, layer, space in _levels(p, g, horizon, absorption, initial_mapping, phase, budget, False):
        history.append(layer)
    complete = [(c, st) for st, (c, _, _) in history[-1].items() if st[1] == space.full]
    if not complete:
        return None
    complete.sort()
    return _witness(history, complete[0][1], g, p.gate_count)


def internal_exhaustive(
    p: Program,
    g: CouplingGraph,
    absorption: bool = True,
    max_t: int = DEFAULT_MAX_T,
    *,
    initial_mapping: Sequence[int] | None = None,
    phase: int | None = None,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
    t_cap: int = DEFAULT_MAX_T,
) -> ExhaustiveResult | None:
    """Lexicographically optimal (depth, explicit SWAPs) by breadth-first search.

    Returns None when no schedule fits within ``max_t`` steps.
    """
    _check_caps(p, max_t, qubit_cap, t_cap)
    if p.qubit_count > g.qubit_count:
        return None
    budget = 2 * max_t * g.edge_count
    history = []
    for t, layer, space in _levels(p, g, max_t, absorption, initial_mapping, phase, budget, True):
        history.append(layer)
        complete = [(c, st) for st, (c, _, _) in layer.items() if st[1] == space.full]
        if complete and t > 0:
            complete.sort()
            sol = _witness(history, complete[0][1], g, p.gate_count)
            return ExhaustiveResult(t, complete[0][0], sol)
    return None
