"""Objective loops on top of satisfiability checks.

Depth is minimised by iterative deepening from a proven lower bound, SWAP
count by a descending budget scan at a fixed horizon, and fidelity by a
sweep over horizons keeping the fewest SWAPs at each.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import permutations
from typing import Callable, Sequence

from ..arch import CouplingGraph, is_matching
from ..encode import EncodingOptions, build
from ..program import Program, dependencies, depth_lower_bound
from ..solution import (
    DEFAULT_FU,
    DEFAULT_T0,
    MappingSolution,
    decode,
    fidelity,
    verify,
)
from .backends import Backend, SolveOutcome, check

log = logging.getLogger(__name__)


class SolveError(RuntimeError):
    """No solution could be produced."""


class SolverTimeout(SolveError):
    def __init__(self, message: str, certified_floor: int | None = None):
        super().__init__(message)
        self.certified_floor = certified_floor


@dataclass(frozen=True)
class DepthCertificate:
    """No solution of depth below ``certified_floor`` exists."""

    certified_floor: int
    instance: str
    horizon_checked: int

    def to_dict(self) -> dict:
        return {
            "certified_floor": self.certified_floor,
            "instance": self.instance,
            "horizon_checked": self.horizon_checked,
        }


@dataclass
class SolveStats:
    checks: list[tuple[int, int | None, str, float]] = field(default_factory=list)

    def record(self, horizon: int, budget: int | None, out: SolveOutcome) -> None:
        self.checks.append((horizon, budget, out.status, out.wall_time))

    @property
    def wall_time(self) -> float:
        return sum(c[3] for c in self.checks)


def instance_id(p: Program, g: CouplingGraph) -> str:
    blob = json.dumps([p.to_dict(), g.to_dict()], sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def default_max_horizon(p: Program) -> int:
    """Twice the qubit count, stretched for programs whose bound is already past it."""
    return max(2 * p.qubit_count, 2 * depth_lower_bound(dependencies(p), p))


def _solve_at(
    p: Program,
    g: CouplingGraph,
    opts: EncodingOptions,
    b: Backend,
    stats: SolveStats | None,
) -> tuple[SolveOutcome, MappingSolution | None]:
    cs = build(p, g, opts)
    out = check(cs, b)
    if stats is not None:
        stats.record(opts.horizon, opts.swap_budget, out)
    if not out.sat:
        return out, None
    sol = decode(out.model, cs.vars)
    verify(p, g, sol)
    return out, sol


def _deepen(p, g, opts, b, max_horizon, stats, start=None):
    """First horizon with a solution, walking up from the lower bound."""
    lb = depth_lower_bound(dependencies(p), p)
    T = max(lb, start or 1)
    cap = max_horizon or default_max_horizon(p)
    floor = T
    while T <= cap:
        out, sol = _solve_at(p, g, replace(opts, horizon=T), b, stats)
        if out.status == "timeout":
            raise SolverTimeout(f"solver timed out at horizon {T}", certified_floor=floor)
        if sol is not None:
            return sol
        floor = T + 1
        T += 1
    return None


def _descend_swaps(p, g, opts, b, horizon, first: MappingSolution, stats, strategy="linear"):
    """Smallest explicit-SWAP count within ``horizon``, starting from ``first``."""
    best = first
    if strategy == "binary":
        lo, hi = 0, best.swap_count  # hi is feasible
        while lo < hi:
            mid = (lo + hi) // 2
            out, sol = _solve_at(p, g, replace(opts, horizon=horizon, swap_budget=mid), b, stats)
            if out.status == "timeout":
                raise SolverTimeout(f"solver timed out at swap budget {mid}")
            if sol is None:
                lo = mid + 1
            else:
                best = sol
                hi = sol.swap_count
        return best
    if strategy != "linear":
        raise ValueError(f"unknown swap search strategy {strategy!r}")
    while best.swap_count > 0:
        budget = best.swap_count - 1
        out, sol = _solve_at(p, g, replace(opts, horizon=horizon, swap_budget=budget), b, stats)
        if out.status == "timeout":
            raise SolverTimeout(f"solver timed out at swap budget {budget}")
        if sol is None:
            break
        best = sol
    return best


def minimize_depth(
    p: Program,
    g: CouplingGraph,
    opts: EncodingOptions | None = None,
    b: Backend | None = None,
    *,
    max_horizon: int | None = None,
    tiebreak_swaps: bool = True,
    stats: SolveStats | None = None,
) -> MappingSolution:
    """Depth-optimal solution under the given options.

    With ``tiebreak_swaps`` the SWAP count is then minimised at that depth.

    Raises:
        SolveError: if nothing fits within ``max_horizon``.
        SolverTimeout: carrying the last certified depth floor.
    """
    opts = opts or EncodingOptions(1)
    b = b or Backend()
    sol = _deepen(p, g, opts, b, max_horizon, stats)
    if sol is None:
        raise SolveError(f"no solution within horizon {max_horizon or default_max_horizon(p)}")
    if tiebreak_swaps and sol.swap_count:
        sol = _descend_swaps(p, g, opts, b, sol.depth, sol, stats)
    return sol


def minimize_swaps(
    p: Program,
    g: CouplingGraph,
    opts: EncodingOptions | None = None,
    b: Backend | None = None,
    horizon_slack: int = 0,
    *,
    horizon: int | None = None,
    strategy: str = "linear",
    max_horizon: int | None = None,
    stats: SolveStats | None = None,
) -> MappingSolution:
    """Fewest explicit SWAPs at the optimal depth plus ``horizon_slack``.

    ``horizon`` fixes the step budget directly instead.
    """
    if horizon_slack < 0:
        raise ValueError("horizon slack must be non-negative")
    opts = opts or EncodingOptions(1)
    b = b or Backend()
    if horizon is None:
        first = _deepen(p, g, opts, b, max_horizon, stats)
        if first is None:
            raise SolveError("no solution within the horizon cap")
        horizon = first.depth + horizon_slack
        if horizon_slack:
            out, first = _solve_at(p, g, replace(opts, horizon=horizon), b, stats)
    else:
        out, first = _solve_at(p, g, replace(opts, horizon=horizon), b, stats)
        if out.status == "timeout":
            raise SolverTimeout(f"solver timed out at horizon {horizon}")
        if first is None:
            raise SolveError(f"no solution within horizon {horizon}")
    return _descend_swaps(p, g, opts, b, horizon, first, stats, strategy)


def pareto_frontier(
    p: Program,
    g: CouplingGraph,
    opts: EncodingOptions | None = None,
    b: Backend | None = None,
    *,
    max_horizon: int | None = None,
    stats: SolveStats | None = None,
) -> list[MappingSolution]:
    """Fewest-SWAP solution for each horizon from the optimum up to the cap.

    Stops early once a horizon needs no explicit SWAPs: beyond it only the
    depth can grow.
    """
    opts = opts or EncodingOptions(1)
    b = b or Backend()
    first = _deepen(p, g, opts, b, max_horizon, stats)
    if first is None:
        raise SolveError("no solution within the horizon cap")
    cap = max_horizon or default_max_horizon(p)
    out = []
    prev = None
    for T in range(first.depth, cap + 1):
        seed = first if T == first.depth else prev
        sol = _descend_swaps(p, g, opts, b, T, seed, stats)
        if prev is None or sol.swap_count < prev.swap_count:
            out.append(sol)
        prev = sol
        if sol.swap_count == 0:
            break
    return out


def maximize_fidelity(
    p: Program,
    g: CouplingGraph,
    opts: EncodingOptions | None = None,
    b: Backend | None = None,
    T0: float = DEFAULT_T0,
    fU: float = DEFAULT_FU,
    *,
    max_horizon: int | None = None,
    stats: SolveStats | None = None,
) -> MappingSolution:
    if T0 <= 0 or not 0 < fU <= 1:
        raise ValueError("need T0 > 0 and 0 < fU <= 1")
    front = pareto_frontier(p, g, opts, b, max_horizon=max_horizon, stats=stats)
    best, best_f = None, -1.0
    for sol in front:
        f = fidelity(p.qubit_count, sol.depth, p.gate_count, sol.swap_count, T0, fU)
        if f > best_f:
            best, best_f = sol, f
    return best


def certify_depth(
    p: Program,
    g: CouplingGraph,
    reduced: Sequence[EncodingOptions] | EncodingOptions,
    b: Backend | None = None,
    *,
    exact: EncodingOptions | None = None,
    max_horizon: int | None = None,
    stats: SolveStats | None = None,
) -> tuple[MappingSolution, DepthCertificate | None]:
    """Solve a reduced instance, then prove its depth optimal on the exact one.

    ``reduced`` may list several option sets; the shallowest result is
    kept.  The exact instance is checked
    at one step less; while it is satisfiable the better solution replaces
    the reduced one and the check repeats lower.
    """
    b = b or Backend()
    variants = [reduced] if isinstance(reduced, EncodingOptions) else list(reduced)
    best = None
    for opts in variants:
        try:
            sol = minimize_depth(p, g, opts, b, max_horizon=max_horizon, tiebreak_swaps=False, stats=stats)
        except SolveError:
            continue
        if best is None or sol.depth < best.depth:
            best = sol
    exact = exact or replace(variants[0], alternating="off", initial_mapping=None, swap_budget=None)
    if best is None:
        best = minimize_depth(p, g, exact, b, max_horizon=max_horizon, tiebreak_swaps=False, stats=stats)
    ident = instance_id(p, g)
    while True:
        h = best.depth - 1
        if h < 1:
            return best, DepthCertificate(best.depth, ident, h)
        try:
            out, sol = _solve_at(p, g, replace(exact, horizon=h), b, stats)
        except SolveError:
            raise
        if out.status == "timeout":
            return best, None
        if sol is None:
            return best, DepthCertificate(best.depth, ident, h)
        log.warning("reduction lost depth optimality: exact instance fits in %d steps", sol.depth)
        best = sol


def _first_layer(p: Program) -> list[int]:
    deps = dependencies(p)
    has_pred = {b for _, b in deps.precedence}
    return [gi for gi in range(p.gate_count) if gi not in has_pred]


def _is_all_to_all(p: Program) -> bool:
    pairs = {frozenset(g.operands) for g in p.gates}
    n = p.qubit_count
    return (
        len(p.commuting_groups) == 1
        and len(pairs) == p.gate_count == n * (n - 1) // 2
    )


def _matchings_of_size(g: CouplingGraph, k: int) -> list[tuple[int, ...]]:
    out = []

    def rec(start: int, used: frozenset, acc: tuple):
        if len(acc) == k:
            out.append(acc)
            return
        for e in range(start, g.edge_count):
            a, b = g.edges[e]
            if a in used or b in used:
                continue
            rec(e + 1, used | {a, b}, acc + (e,))

    rec(0, frozenset(), ())
    return out


def initial_mapping_candidates(p: Program, g: CouplingGraph) -> list[tuple[int, ...]]:
    """Initial mappings worth trying in a portfolio.

    For a program whose first layer is a maximal matching of its qubits,
    every way of putting those gates on a matching of the coupling graph is
    listed (gate-to-edge assignment times edge orientation).  On a line,
    mirror images are dropped.  A fully symmetric all-to-all program needs
    only one mapping.  Anything else falls back to the identity.
    """
    n = p.qubit_count
    identity = tuple(range(n))
    if _is_all_to_all(p):
        return [identity]
    layer = _first_layer(p)
    qubits = [q for gi in layer for q in p.gates[gi].operands]
    if len(layer) != n // 2 or len(set(qubits)) != len(qubits) or len(layer) == 0:
        log.warning("first layer is not a maximal matching; using the identity mapping")
        return [identity]
    rest = [q for q in range(n) if q not in set(qubits)]
    seen = set()
    out = []
    for edges in _matchings_of_size(g, len(layer)):
        for assign in permutations(edges):
            used = {v for e in assign for v in g.edges[e]}
            free = [v for v in range(g.qubit_count) if v not in used]
            for flips in range(1 << len(layer)):
                base = [None] * n
                for i, (gi, e) in enumerate(zip(layer, assign)):
                    a, b2 = p.gates[gi].operands
                    u, v = g.edges[e]
                    if flips >> i & 1:
                        u, v = v, u
                    base[a], base[b2] = u, v
                for spots in permutations(free, len(rest)):
                    m = list(base)
                    for q, spot in zip(rest, spots):
                        m[q] = spot
                    m = tuple(m)
                    if g.kind == "line":
                        mirror = tuple(g.qubit_count - 1 - x for x in m)
                        if mirror in seen:
                            continue
                    seen.add(m)
                    out.append(m)
    return out


def _objective_key(objective: str, p: Program, T0: float, fU: float) -> Callable[[MappingSolution], tuple]:
    if objective == "depth":
        return lambda s: (s.depth, s.swap_count)
    if objective == "swap":
        return lambda s: (s.swap_count, s.depth)
    if objective == "fidelity":
        return lambda s: (-fidelity(p.qubit_count, s.depth, p.gate_count, s.swap_count, T0, fU),)
    raise ValueError(f"unknown objective {objective!r}")


def solve_objective(
    p: Program,
    g: CouplingGraph,
    opts: EncodingOptions,
    b: Backend,
    objective: str = "depth",
    *,
    horizon_slack: int = 0,
    strategy: str = "linear",
    max_horizon: int | None = None,
    T0: float = DEFAULT_T0,
    fU: float = DEFAULT_FU,
    stats: SolveStats | None = None,
) -> MappingSolution:
    if objective == "depth":
        return minimize_depth(p, g, opts, b, max_horizon=max_horizon, stats=stats)
    if objective == "swap":
        return minimize_swaps(p, g, opts, b, horizon_slack, strategy=strategy, max_horizon=max_horizon, stats=stats)
    if objective == "fidelity":
        return maximize_fidelity(p, g, opts, b, T0, fU, max_horizon=max_horizon, stats=stats)
    raise ValueError(f"unknown objective {objective!r}")


def portfolio_solve(
    p: Program,
    g: CouplingGraph,
    opts: EncodingOptions,
    b: Backend,
    candidates: Sequence[Sequence[int]],
    worker_count: int = 1,
    objective: str = "depth",
    **kw,
) -> MappingSolution:
    """Solve once per candidate initial mapping and keep the best.

    Ties go to the lowest candidate index, so the result does not depend on
    completion order.
    """
    if not candidates:
        raise ValueError("portfolio needs at least one candidate")
    key = _objective_key(objective, p, kw.get("T0", DEFAULT_T0), kw.get("fU", DEFAULT_FU))

    def run(m):
        try:
            return solve_objective(p, g, replace(opts, initial_mapping=tuple(m)), b, objective, **kw), None
        except SolveError as exc:
            return None, exc

    with ThreadPoolExecutor(max_workers=max(1, worker_count)) as pool:
        results = list(pool.map(run, candidates))
    scored = [(key(sol), i, sol) for i, (sol, _) in enumerate(results) if sol is not None]
    if not scored:
        reasons = "; ".join(f"candidate {i}: {err}" for i, (_, err) in enumerate(results))
        raise SolveError(f"every portfolio instance failed ({reasons})")
    scored.sort(key=lambda x: (x[0], x[1]))
    return scored[0][2]


def alternating_phases(
    p: Program,
    g: CouplingGraph,
    opts: EncodingOptions,
    b: Backend,
    objective: str = "depth",
    **kw,
) -> MappingSolution:
    """Best solution over both matching phases.

    Both phases go into one system behind a selector Bool, so every check
    answers for the two at once and the objective loop runs only once.
    """
    return solve_objective(p, g, replace(opts, alternating="either"), b, objective, **kw)
