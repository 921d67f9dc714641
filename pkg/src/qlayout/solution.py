"""Mapping solutions: decoding, independent verification and metrics."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping

from .arch import CouplingGraph, is_matching, line_parity_classes
from .encode import VarTable, alpha_var, pi_var, sigma_var, tg_var, xg_var
from .program import Program, dependencies

DEFAULT_T0 = 50.0
DEFAULT_FU = 0.99


class DecodeError(ValueError):
    pass


class SolutionFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    family: str
    message: str
    indices: tuple = ()

    def __str__(self) -> str:
        return f"[{self.family}] {self.message}"


class VerificationError(Exception):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations[:5]))


@dataclass(frozen=True)
class MappingSolution:
    """A schedule of gates and SWAPs with the per-step qubit mapping.

    ``mapping[t][q]`` is the physical qubit of program qubit ``q`` when step
    ``t`` begins.  SWAPs listed at step ``t`` act after that step's gates.
    """

    horizon: int
    mapping: tuple[tuple[int, ...], ...]
    placements: tuple[tuple[int, int], ...]  # per gate: (t, edge)
    absorbed: frozenset[tuple[int, int]] = frozenset()  # (edge, t)
    explicit: frozenset[tuple[int, int]] = frozenset()  # (edge, t)

    @property
    def depth(self) -> int:
        return 1 + max((t for t, _ in self.placements), default=-1)

    @property
    def swap_count(self) -> int:
        return len(self.explicit)

    def gates_at(self, t: int) -> list[int]:
        return [g for g, (tt, _) in enumerate(self.placements) if tt == t]

    def edges_at(self, t: int) -> set[int]:
        """Edges carrying a program gate at step ``t``."""
        return {e for tt, e in self.placements if tt == t}

    def final_mapping(self, g: CouplingGraph) -> tuple[int, ...]:
        return apply_swaps(self.mapping[-1], g, swaps_at(self, self.horizon - 1))

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "mapping": [list(r) for r in self.mapping],
            "placements": [{"t": t, "edge": e} for t, e in self.placements],
            "absorbed": [list(x) for x in sorted(self.absorbed)],
            "explicit": [list(x) for x in sorted(self.explicit)],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class Metrics:
    depth: int
    swap_count: int
    absorbed_count: int
    gate_count: int
    fidelity: float

    def summary(self) -> str:
        return (
            f"depth={self.depth} swaps={self.swap_count} absorbed={self.absorbed_count} "
            f"fidelity={self.fidelity:.6f}"
        )


def solution_from_dict(d: Mapping) -> MappingSolution:
    try:
        return MappingSolution(
            horizon=int(d["horizon"]),
            mapping=tuple(tuple(int(x) for x in row) for row in d["mapping"]),
            placements=tuple((int(p["t"]), int(p["edge"])) for p in d["placements"]),
            absorbed=frozenset((int(e), int(t)) for e, t in d.get("absorbed", [])),
            explicit=frozenset((int(e), int(t)) for e, t in d.get("explicit", [])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SolutionFormatError(f"malformed solution: {exc}") from exc


def load_solution(path: str | Path) -> MappingSolution:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SolutionFormatError(f"solution is not valid JSON: {exc}") from exc
    return solution_from_dict(data)


def swaps_at(s: MappingSolution, t: int) -> list[int]:
    return sorted({e for e, tt in s.absorbed | s.explicit if tt == t})


def apply_swaps(mapping: Iterable[int], g: CouplingGraph, edges: Iterable[int]) -> tuple[int, ...]:
    where = {}
    for k in edges:
        a, b = g.edges[k]
        where[a] = b
        where[b] = a
    return tuple(where.get(p, p) for p in mapping)


def decode(model: Mapping[str, int | bool], vt: VarTable) -> MappingSolution:
    """Turn a solver model into a solution.

    Steps after the last gate are trimmed, as are SWAPs at or after the last
    gate step: nothing observes the mapping they produce.
    """
    def get(name: str):
        if name not in model:
            raise DecodeError(f"model has no value for {name}")
        return model[name]

    def get_int(name: str, hi: int) -> int:
        v = get(name)
        if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < hi:
            raise DecodeError(f"{name}={v!r} outside 0..{hi - 1}")
        return v

    T = vt.horizon
    mapping = tuple(
        tuple(get_int(pi_var(q, t), vt.physical) for q in range(vt.qubits)) for t in range(T)
    )
    placements = tuple(
        (get_int(tg_var(gi), T), get_int(xg_var(gi), vt.edges)) for gi in range(vt.gates)
    )
    occupied = set(placements)
    absorbed = set()
    explicit = set()
    for k in range(vt.edges):
        for t in range(T):
            if bool(get(alpha_var(k, t))):
                if (t, k) not in occupied:
                    raise DecodeError(f"absorbed SWAP on e{k} at t={t} has no gate to absorb it")
                absorbed.add((k, t))
            if bool(get(sigma_var(k, t))):
                explicit.add((k, t))
    depth = 1 + max(t for t, _ in placements)
    return MappingSolution(
        horizon=depth,
        mapping=mapping[:depth],
        placements=placements,
        absorbed=frozenset(x for x in absorbed if x[1] < depth - 1),
        explicit=frozenset(x for x in explicit if x[1] < depth - 1),
    )


def solution_to_model(s: MappingSolution, vt: VarTable, g: CouplingGraph) -> dict[str, int | bool]:
    """Assignment over ``vt`` realising ``s``; pads idle trailing steps."""
    if s.horizon > vt.horizon:
        raise ValueError(f"solution needs {s.horizon} steps, table has {vt.horizon}")
    model: dict[str, int | bool] = {}
    last = s.final_mapping(g)
    for t in range(vt.horizon):
        row = s.mapping[t] if t < s.horizon else last
        for q in range(vt.qubits):
            model[pi_var(q, t)] = row[q]
    for gi, (t, e) in enumerate(s.placements):
        model[tg_var(gi)] = t
        model[xg_var(gi)] = e
    for k in range(vt.edges):
        for t in range(vt.horizon):
            model[alpha_var(k, t)] = (k, t) in s.absorbed
            model[sigma_var(k, t)] = (k, t) in s.explicit
    return model


def find_violations(p: Program, g: CouplingGraph, s: MappingSolution) -> list[Violation]:
    """Re-execute the solution forward and collect every rule it breaks."""
    out: list[Violation] = []
    T, Q = s.horizon, p.qubit_count
    if T < 1:
        return [Violation("shape", "horizon must be at least 1")]
    if len(s.mapping) != T:
        out.append(Violation("shape", f"mapping has {len(s.mapping)} rows for horizon {T}"))
        return out
    if len(s.placements) != p.gate_count:
        out.append(Violation("shape", f"{len(s.placements)} placements for {p.gate_count} gates"))
        return out
    for t, row in enumerate(s.mapping):
        if len(row) != Q:
            out.append(Violation("shape", f"mapping row {t} has {len(row)} entries", (t,)))
            return out
        if any(not 0 <= x < g.qubit_count for x in row):
            out.append(Violation("shape", f"mapping row {t} names an unknown physical qubit", (t,)))
            return out
        if len(set(row)) != Q:
            out.append(Violation("injectivity", f"two program qubits share a physical qubit at t={t}", (t,)))
    for gi, (t, e) in enumerate(s.placements):
        if not 0 <= t < T or not 0 <= e < g.edge_count:
            out.append(Violation("shape", f"gate {gi} placed at invalid (t={t}, e{e})", (gi,)))
    for e, t in s.absorbed | s.explicit:
        if not 0 <= t < T or not 0 <= e < g.edge_count:
            out.append(Violation("shape", f"SWAP at invalid (e{e}, t={t})", (e, t)))
    if out:
        return out

    for gi, (t, e) in enumerate(s.placements):
        a, b = p.gates[gi].operands
        ends = {s.mapping[t][a], s.mapping[t][b]}
        if ends != set(g.edges[e]):
            out.append(Violation(
                "spacetime",
                f"gate {gi} on e{e}={g.edges[e]} at t={t} but its qubits sit on {sorted(ends)}",
                (gi, t, e),
            ))

    deps = dependencies(p)
    for a, b in sorted(deps.precedence):
        if not s.placements[a][0] < s.placements[b][0]:
            out.append(Violation("dependency", f"gate {b} must run after gate {a}", (a, b)))
    for a, b in sorted(deps.distinct_time):
        if s.placements[a][0] == s.placements[b][0]:
            out.append(Violation("dependency", f"gates {a} and {b} share a qubit at one step", (a, b)))

    for t in range(T):
        busy: dict[int, str] = {}
        for gi in s.gates_at(t):
            for v in g.edges[s.placements[gi][1]]:
                if v in busy:
                    out.append(Violation("overlap", f"p{v} used twice at t={t}", (t, v)))
                busy[v] = f"gate {gi}"
        for e in sorted(k for k, tt in s.explicit if tt == t):
            for v in g.edges[e]:
                if v in busy:
                    out.append(Violation("overlap", f"explicit SWAP on e{e} overlaps {busy[v]} at t={t}", (e, t)))
                busy[v] = f"SWAP on e{e}"

    gate_slots = {(e, t) for t, e in s.placements}
    for e, t in sorted(s.absorbed):
        if (e, t) not in gate_slots:
            out.append(Violation("absorption", f"absorbed SWAP on e{e} at t={t} has no gate", (e, t)))

    for t in range(T - 1):
        expect = apply_swaps(s.mapping[t], g, swaps_at(s, t))
        if tuple(s.mapping[t + 1]) != expect:
            out.append(Violation(
                "transform",
                f"mapping at t={t + 1} is {list(s.mapping[t + 1])}, SWAPs at t={t} give {list(expect)}",
                (t + 1,),
            ))
    return out


def verify(
    p: Program,
    g: CouplingGraph,
    s: MappingSolution,
    T0: float = DEFAULT_T0,
    fU: float = DEFAULT_FU,
) -> Metrics:
    """Check a solution and return its metrics.

    Raises:
        VerificationError: listing every violated rule.
    """
    bad = find_violations(p, g, s)
    if bad:
        raise VerificationError(bad)
    return metrics_of(p, s, T0, fU)


def metrics_of(p: Program, s: MappingSolution, T0: float = DEFAULT_T0, fU: float = DEFAULT_FU) -> Metrics:
    return Metrics(
        depth=s.depth,
        swap_count=len(s.explicit),
        absorbed_count=len(s.absorbed),
        gate_count=p.gate_count,
        fidelity=fidelity(p.qubit_count, s.depth, p.gate_count, len(s.explicit), T0, fU),
    )


def fidelity(qubits: int, depth: int, gates: int, swaps: int, T0: float = DEFAULT_T0, fU: float = DEFAULT_FU) -> float:
    """Decoherence over idle qubit-steps times one factor per two-qubit gate."""
    if T0 <= 0:
        raise ValueError("T0 must be positive")
    if not 0 < fU <= 1:
        raise ValueError("fU must lie in (0, 1]")
    busy = 2 * (gates + swaps)
    slots = qubits * depth
    if slots < busy:
        raise ValueError(f"{gates + swaps} two-qubit gates cannot fit in {qubits} qubits x {depth} steps")
    if slots == 0:
        return 1.0
    return math.exp(-(slots - busy) / (qubits * T0)) * fU ** (gates + swaps)


def multi_iteration_fidelity(f_single: float, p_iters: int) -> float:
    if not 0 < f_single <= 1:
        raise ValueError("single-iteration fidelity must lie in (0, 1]")
    if p_iters < 1:
        raise ValueError("iteration count must be at least 1")
    return f_single ** p_iters


def check_theorem1(s: MappingSolution, g: CouplingGraph) -> list[int]:
    """Steps ``t`` whose gate edges together with step ``t + 1``'s form a matching."""
    flagged = []
    for t in range(s.horizon - 1):
        now, nxt = s.edges_at(t), s.edges_at(t + 1)
        if now and nxt and is_matching(g, now | nxt):
            flagged.append(t)
    return flagged


def alternating_pattern_holds(s: MappingSolution, g: CouplingGraph) -> bool:
    line_parity_classes(g)
    active: dict[int, set[int]] = {}
    for t, e in s.placements:
        active.setdefault(t, set()).add(e)
    for e, t in s.explicit:
        active.setdefault(t, set()).add(e)
    for phase in (0, 1):
        if all(k % 2 == (t + phase) % 2 for t, es in active.items() for k in es):
            return True
    return False


def _drop_empty_steps(s: MappingSolution) -> MappingSolution:
    keep = []
    for t in range(s.horizon):
        if s.gates_at(t) or swaps_at(s, t):
            keep.append(t)
    if len(keep) == s.horizon:
        return s
    if not keep:
        return s
    # an empty step leaves the mapping untouched, so its row equals the next one
    new_t = {t: i for i, t in enumerate(keep)}
    return MappingSolution(
        horizon=len(keep),
        mapping=tuple(s.mapping[t] for t in keep),
        placements=tuple((new_t[t], e) for t, e in s.placements),
        absorbed=frozenset((e, new_t[t]) for e, t in s.absorbed),
        explicit=frozenset((e, new_t[t]) for e, t in s.explicit),
    )


def _toggle(xs: frozenset, x) -> frozenset:
    return xs - {x} if x in xs else xs | {x}


def _with_mapping_row(s: MappingSolution, t: int, row: tuple[int, ...]) -> tuple:
    rows = list(s.mapping)
    rows[t] = row
    return tuple(rows)


def _absorb_candidates(s: MappingSolution, g: CouplingGraph):
    """Yield rewritten solutions that fold one explicit SWAP into a gate."""
    slots = {(e, t) for t, e in s.placements}
    for e, t in sorted(s.explicit):
        # gate on e just before: the SWAP follows it and can ride along
        if (e, t - 1) in slots:
            absorbed = _toggle(s.absorbed, (e, t - 1))
            row = apply_swaps(s.mapping[t - 1], g, [k for k in swaps_at(s, t - 1) if k != e] +
                              ([e] if (e, t - 1) in absorbed else []))
            yield replace(
                s,
                explicit=s.explicit - {(e, t)},
                absorbed=absorbed,
                mapping=_with_mapping_row(s, t, row),
            )
        # gate on e just after: run the gate first, then swap with it
        if (e, t + 1) in slots and t + 1 < s.horizon:
            absorbed = _toggle(s.absorbed, (e, t + 1))
            row = apply_swaps(s.mapping[t], g, [k for k in swaps_at(s, t) if k != e])
            yield replace(
                s,
                explicit=s.explicit - {(e, t)},
                absorbed=absorbed,
                mapping=_with_mapping_row(s, t + 1, row),
            )


def _shift_candidates(s: MappingSolution, g: CouplingGraph):
    """Yield solutions with one gate (and its absorbed SWAP) a step earlier."""
    for gi, (t, e) in enumerate(s.placements):
        if t == 0:
            continue
        placements = list(s.placements)
        placements[gi] = (t - 1, e)
        absorbed = s.absorbed
        mapping = s.mapping
        if (e, t) in s.absorbed:
            if (e, t - 1) in s.absorbed:
                continue
            absorbed = (s.absorbed - {(e, t)}) | {(e, t - 1)}
            row = apply_swaps(s.mapping[t - 1], g, swaps_at(s, t - 1) + [e])
            mapping = _with_mapping_row(s, t, row)
        yield MappingSolution(s.horizon, mapping, tuple(placements), absorbed, s.explicit)


def postprocess_absorb(s: MappingSolution, p: Program, g: CouplingGraph) -> MappingSolution:
    """Fold explicit SWAPs that touch a gate on the same edge into that gate.

    Greedy to a fixpoint: each rewrite is kept only if the verifier accepts
    it, then gates slide to earlier steps and empty steps are dropped.  No
    optimality claim is made.
    """
    bad = find_violations(p, g, s)
    if bad:
        raise VerificationError(bad)
    changed = True
    while changed:
        changed = False
        for cand in _absorb_candidates(s, g):
            if not find_violations(p, g, cand):
                s = cand
                changed = True
                break
        if changed:
            continue
        for cand in _shift_candidates(s, g):
            cand = _drop_empty_steps(cand)
            if (cand.depth, cand.horizon) < (s.depth, s.horizon) or _earlier(cand, s):
                if not find_violations(p, g, cand):
                    s = cand
                    changed = True
                    break
    return _trim(_drop_empty_steps(s))


def _earlier(a: MappingSolution, b: MappingSolution) -> bool:
    return sum(t for t, _ in a.placements) < sum(t for t, _ in b.placements)


def _trim(s: MappingSolution) -> MappingSolution:
    d = s.depth
    return MappingSolution(
        horizon=d,
        mapping=s.mapping[:d],
        placements=s.placements,
        absorbed=frozenset(x for x in s.absorbed if x[1] < d),
        explicit=frozenset(x for x in s.explicit if x[1] < d),
    )


def reverse_solution(s: MappingSolution, g: CouplingGraph) -> MappingSolution:
    """Play the schedule backwards; it solves the reversed program.

    Gate ``g`` of the original becomes gate ``n - 1 - g`` of the reversed
    program, matching :meth:`Program.reversed`.
    """
    T = s.horizon
    after = [s.mapping[t + 1] for t in range(T - 1)] + [s.final_mapping(g)]
    n = len(s.placements)
    placements = [None] * n
    for gi, (t, e) in enumerate(s.placements):
        placements[n - 1 - gi] = (T - 1 - t, e)
    return MappingSolution(
        horizon=T,
        mapping=tuple(after[T - 1 - t] for t in range(T)),
        placements=tuple(placements),
        absorbed=frozenset((e, T - 1 - t) for e, t in s.absorbed),
        explicit=frozenset((e, T - 1 - t) for e, t in s.explicit),
    )
