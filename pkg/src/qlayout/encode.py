"""Constraint system for mapping with simultaneous SWAP absorption.

Variables, for horizon ``T``:

* ``pi_q{q}_t{t}``  Int, physical qubit holding program qubit ``q`` at ``t``
* ``tg_{g}``        Int, time step of gate ``g``
* ``xg_{g}``        Int, edge index of gate ``g``
* ``a_e{k}_t{t}``   Bool, SWAP absorbed into the gate on ``e_k`` at ``t``
* ``s_e{k}_t{t}``   Bool, explicit SWAP on ``e_k`` at ``t``

A SWAP at step ``t`` acts after that step's gates, so it changes the mapping
between ``t`` and ``t + 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .arch import ArchError, CouplingGraph, line_parity_classes
from .program import DependencyGraph, Program, dependencies
from .terms import (
    AtMost,
    And,
    Distinct,
    Eq,
    Implies,
    Lt,
    Le,
    Ne,
    Not,
    Or,
    Term,
    to_smt,
)


class EncodingError(ValueError):
    pass


ALTERNATING_MODES = ("off", "phase0", "phase1", "either")
# true selects phase 1 when the reduction may pick either phase
PHASE_VAR = "alt_phase1"


def pi_var(q: int, t: int) -> str:
    return f"pi_q{q}_t{t}"


def tg_var(g: int) -> str:
    return f"tg_{g}"


def xg_var(g: int) -> str:
    return f"xg_{g}"


def alpha_var(k: int, t: int) -> str:
    return f"a_e{k}_t{t}"


def sigma_var(k: int, t: int) -> str:
    return f"s_e{k}_t{t}"


@dataclass(frozen=True)
class VarTable:
    qubits: int
    gates: int
    edges: int
    horizon: int
    physical: int

    @property
    def count(self) -> int:
        return self.qubits * self.horizon + 2 * self.gates + 2 * self.edges * self.horizon

    def int_vars(self) -> list[tuple[str, int]]:
        """Integer variables with their exclusive upper bound."""
        out = [(pi_var(q, t), self.physical) for q in range(self.qubits) for t in range(self.horizon)]
        out += [(tg_var(g), self.horizon) for g in range(self.gates)]
        out += [(xg_var(g), self.edges) for g in range(self.gates)]
        return out

    def bool_vars(self) -> list[str]:
        out = [alpha_var(k, t) for k in range(self.edges) for t in range(self.horizon)]
        out += [sigma_var(k, t) for k in range(self.edges) for t in range(self.horizon)]
        return out

    def names(self) -> list[str]:
        return [n for n, _ in self.int_vars()] + self.bool_vars()


@dataclass(frozen=True)
class EncodingOptions:
    horizon: int
    absorption: bool = True
    alternating: str = "off"  # off | phase0 | phase1 | either
    initial_mapping: tuple[int, ...] | None = None
    swap_budget: int | None = None
    symmetry_breaking: bool = True

    def __post_init__(self):
        if self.alternating not in ALTERNATING_MODES:
            raise EncodingError(f"alternating must be one of {', '.join(ALTERNATING_MODES)}, got {self.alternating!r}")
        if self.swap_budget is not None and self.swap_budget < 0:
            raise EncodingError("swap budget must be non-negative")
        if self.initial_mapping is not None:
            m = tuple(self.initial_mapping)
            if len(set(m)) != len(m):
                raise EncodingError(f"initial mapping {list(m)} is not injective")
            object.__setattr__(self, "initial_mapping", m)


@dataclass(frozen=True)
class ConstraintSystem:
    program: Program
    graph: CouplingGraph
    options: EncodingOptions
    vars: VarTable
    deps: DependencyGraph
    clauses: tuple[tuple[str, Term], ...] = field(repr=False)
    # auxiliary Bools outside the variable table
    extra_bools: tuple[str, ...] = ()

    @property
    def horizon(self) -> int:
        return self.vars.horizon

    def depth_objective(self) -> Term:
        """Largest gate time; the model's depth is this plus one."""
        return ("max", *[tg_var(g) for g in range(self.vars.gates)])

    def swap_objective(self) -> Term:
        return ("+", *[("ite", sigma_var(k, t), 1, 0) for k in range(self.vars.edges) for t in range(self.horizon)])

    def families(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for fam, _ in self.clauses:
            out[fam] = out.get(fam, 0) + 1
        return out


def build(p: Program, g: CouplingGraph, opts: EncodingOptions) -> ConstraintSystem:
    """Build the full constraint system for one horizon."""
    T = opts.horizon
    if T < 1:
        raise EncodingError(f"horizon must be at least 1, got {T}")
    if p.qubit_count > g.qubit_count:
        raise EncodingError(
            f"program needs {p.qubit_count} qubits but the architecture has {g.qubit_count}"
        )
    vt = VarTable(p.qubit_count, p.gate_count, g.edge_count, T, g.qubit_count)
    deps = dependencies(p)
    Q, G, E = vt.qubits, vt.gates, vt.edges
    cl: list[tuple[str, Term]] = []

    for name, hi in vt.int_vars():
        cl.append(("domain", And(Le(0, name), Lt(name, hi))))

    for a, b in sorted(deps.precedence):
        cl.append(("dependency", Lt(tg_var(a), tg_var(b))))
    for a, b in sorted(deps.distinct_time):
        cl.append(("dependency", Ne(tg_var(a), tg_var(b))))

    def at(gi: int, t: int, k: int) -> Term:
        return And(Eq(tg_var(gi), t), Eq(xg_var(gi), k))

    for gate in p.gates:
        q, q2 = gate.operands
        for t in range(T):
            for k, (u, v) in enumerate(g.edges):
                cl.append((
                    "spacetime",
                    Implies(
                        at(gate.id, t, k),
                        Or(
                            And(Eq(pi_var(q, t), u), Eq(pi_var(q2, t), v)),
                            And(Eq(pi_var(q, t), v), Eq(pi_var(q2, t), u)),
                        ),
                    ),
                ))

    adj = g.adjacent_edges
    for t in range(T):
        for k in range(E):
            for j in adj[k]:
                if j > k:
                    cl.append(("overlap", Not(And(sigma_var(k, t), sigma_var(j, t)))))
    for gate in p.gates:
        for t in range(T):
            for k in range(E):
                blocked = (k, *adj[k])
                cl.append((
                    "overlap",
                    Implies(at(gate.id, t, k), And(*[Not(sigma_var(j, t)) for j in blocked])),
                ))

    for t in range(T):
        for k in range(E):
            cl.append((
                "absorption",
                Implies(alpha_var(k, t), Or(*[at(gi, t, k) for gi in range(G)])),
            ))

    for t in range(T - 1):
        for q in range(Q):
            for k, (u, v) in enumerate(g.edges):
                moved = Or(sigma_var(k, t), alpha_var(k, t))
                cl.append(("transform", Implies(And(Eq(pi_var(q, t), u), moved), Eq(pi_var(q, t + 1), v))))
                cl.append(("transform", Implies(And(Eq(pi_var(q, t), v), moved), Eq(pi_var(q, t + 1), u))))
            for pp in range(g.qubit_count):
                idle = And(*[Not(sigma_var(k, t)) for k in g.incident[pp]],
                           *[Not(alpha_var(k, t)) for k in g.incident[pp]])
                cl.append(("transform", Implies(And(Eq(pi_var(q, t), pp), idle), Eq(pi_var(q, t + 1), pp))))

    if opts.symmetry_breaking:
        # two SWAPs on one edge in a row cancel; dropping both keeps any solution valid
        for k in range(E):
            for t in range(T - 1):
                cl.append(("symmetry", Not(And(sigma_var(k, t), sigma_var(k, t + 1)))))

    for t in range(T):
        cl.append(("injective", Distinct(*[pi_var(q, t) for q in range(Q)])))

    if not opts.absorption:
        for k in range(E):
            for t in range(T):
                cl.append(("no-absorption", Not(alpha_var(k, t))))

    cs = ConstraintSystem(p, g, opts, vt, deps, tuple(cl))
    if opts.alternating != "off":
        phase = "either" if opts.alternating == "either" else int(opts.alternating[-1])
        cs = add_alternating_matchings(cs, g, phase)
    if opts.initial_mapping is not None:
        cs = add_initial_mapping(cs, opts.initial_mapping)
    if opts.swap_budget is not None:
        cs = add_swap_budget(cs, opts.swap_budget)
    return cs


def forbidden_slots(g: CouplingGraph, horizon: int, phase: int) -> list[tuple[int, int]]:
    """``(t, k)`` pairs closed to gates and explicit SWAPs in a phase.

    Phase 0 keeps even edges at even steps; phase 1 the opposite.
    """
    line_parity_classes(g)
    bad = 1 if phase == 0 else 0
    return [(t, k) for t in range(horizon) for k in range(g.edge_count) if (t - k) % 2 == bad]


def add_alternating_matchings(cs: ConstraintSystem, g: CouplingGraph, phase: int | str) -> ConstraintSystem:
    """Restrict gates and explicit SWAPs to alternating edge parities.

    ``phase="either"`` lets the solver choose the phase through one extra
    Bool, so a single check covers both.
    """
    if phase not in (0, 1, "either"):
        raise EncodingError(f"phase must be 0, 1 or 'either', got {phase!r}")
    try:
        line_parity_classes(g)
    except ArchError as exc:
        raise EncodingError(str(exc)) from exc

    def closed(t: int, k: int) -> list[Term]:
        out = [Not(sigma_var(k, t))]
        out += [Implies(Eq(tg_var(gi), t), Ne(xg_var(gi), k)) for gi in range(cs.vars.gates)]
        return out

    extra: list[tuple[str, Term]] = []
    if phase == "either":
        for ph in (0, 1):
            guard = PHASE_VAR if ph else Not(PHASE_VAR)
            for t, k in forbidden_slots(g, cs.horizon, ph):
                extra += [("alternating", Implies(guard, c)) for c in closed(t, k)]
        opts = replace(cs.options, alternating="either")
        return replace(cs, options=opts, clauses=cs.clauses + tuple(extra), extra_bools=cs.extra_bools + (PHASE_VAR,))
    for t, k in forbidden_slots(g, cs.horizon, phase):
        extra += [("alternating", c) for c in closed(t, k)]
    opts = replace(cs.options, alternating=f"phase{phase}")
    return replace(cs, options=opts, clauses=cs.clauses + tuple(extra))


def add_initial_mapping(cs: ConstraintSystem, m: Sequence[int] | Mapping[int, int]) -> ConstraintSystem:
    """Pin the time-0 mapping of every program qubit."""
    if isinstance(m, Mapping):
        missing = [q for q in range(cs.vars.qubits) if q not in m]
        if missing:
            raise EncodingError(f"initial mapping misses program qubits {missing}")
        m = [m[q] for q in range(cs.vars.qubits)]
    m = tuple(int(x) for x in m)
    if len(m) != cs.vars.qubits:
        raise EncodingError(f"initial mapping has {len(m)} entries for {cs.vars.qubits} qubits")
    if len(set(m)) != len(m):
        raise EncodingError(f"initial mapping {list(m)} is not injective")
    for p in m:
        if not 0 <= p < cs.vars.physical:
            raise EncodingError(f"initial mapping targets unknown physical qubit p{p}")
    extra = tuple(("initial-mapping", Eq(pi_var(q, 0), p)) for q, p in enumerate(m))
    return replace(cs, options=replace(cs.options, initial_mapping=m), clauses=cs.clauses + extra)


def add_swap_budget(cs: ConstraintSystem, s_max: int) -> ConstraintSystem:
    if s_max < 0:
        raise EncodingError("swap budget must be non-negative")
    sig = [sigma_var(k, t) for k in range(cs.vars.edges) for t in range(cs.horizon)]
    clause = ("swap-budget", AtMost(sig, s_max))
    return replace(cs, options=replace(cs.options, swap_budget=s_max), clauses=cs.clauses + (clause,))


def emit_smtlib(cs: ConstraintSystem, seed: int | None = None) -> str:
    """SMT-LIB2 script for the system, ending in check-sat and get-model."""
    lines = ["(set-logic QF_LIA)"]
    if seed is not None:
        lines.append(f"(set-option :random-seed {int(seed)})")
    for name, _ in cs.vars.int_vars():
        lines.append(f"(declare-const {name} Int)")
    for name in cs.vars.bool_vars() + list(cs.extra_bools):
        lines.append(f"(declare-const {name} Bool)")
    for _, term in cs.clauses:
        lines.append(f"(assert {to_smt(term)})")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"
