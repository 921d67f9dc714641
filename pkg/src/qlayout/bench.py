"""Benchmark families, multi-iteration extension and suite reports."""
from __future__ import annotations

import csv
import io
import json
import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Sequence

from .arch import ArchError, CouplingGraph, line_parity_classes
from .encode import EncodingOptions
from .program import Program, ProgramError, make_program
from .solution import (
    DEFAULT_FU,
    DEFAULT_T0,
    MappingSolution,
    find_violations,
    metrics_of,
    multi_iteration_fidelity,
    reverse_solution,
    verify,
)
from .solve.backends import Backend
from .solve.drivers import (
    SolveError,
    SolverTimeout,
    alternating_phases,
    initial_mapping_candidates,
    portfolio_solve,
    solve_objective,
)

log = logging.getLogger(__name__)

FAMILIES = ("qaoa-3reg", "all-to-all", "qv-like")
MODES = ("exact", "alternating", "fixed-initial", "absorb-off")
_MAX_TRIES = 10_000


def gen_regular_graph(n: int, degree: int, seed: int) -> list[tuple[int, int]]:
    """Random simple connected ``degree``-regular graph on ``n`` vertices.

    Pairing model: shuffle ``n * degree`` half-edge stubs, pair them off in
    order, and start over whenever the result has a loop, a repeated edge
    or more than one component.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    if n <= degree:
        raise ValueError(f"need n > degree, got n={n}, degree={degree}")
    if n * degree % 2:
        raise ValueError(f"n*degree must be even, got {n}*{degree}")
    rng = random.Random(seed)
    stubs = [v for v in range(n) for _ in range(degree)]
    for _ in range(_MAX_TRIES):
        rng.shuffle(stubs)
        edges = set()
        ok = True
        for i in range(0, len(stubs), 2):
            a, b = sorted((stubs[i], stubs[i + 1]))
            if a == b or (a, b) in edges:
                ok = False
                break
            edges.add((a, b))
        if ok and _connected(n, edges):
            return sorted(edges)
    raise RuntimeError(f"no simple connected {degree}-regular graph on {n} vertices after {_MAX_TRIES} tries")


def _connected(n: int, edges) -> bool:
    adj = {v: [] for v in range(n)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {0}
    stack = [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def qaoa_phase_program(edges: Sequence[Sequence[int]], n: int | None = None) -> Program:
    """One commuting gate per graph edge."""
    edges = [tuple(e) for e in edges]
    if not edges:
        raise ProgramError("graph has no edges, so the program would be empty")
    if n is None:
        n = 1 + max(max(e) for e in edges)
    return make_program(n, edges, commuting=True, label="zz")


def all_to_all_program(n: int) -> Program:
    if n < 2:
        raise ProgramError("all-to-all needs at least 2 qubits")
    return make_program(n, combinations(range(n), 2), commuting=True, label="zz")


def qv_like_program(n: int, layers: int, seed: int) -> Program:
    """Layers of gates on random disjoint qubit pairs, in strict order."""
    if n < 2 or layers < 1:
        raise ProgramError("need n >= 2 and layers >= 1")
    rng = random.Random(seed)
    pairs = []
    for _ in range(layers):
        order = list(range(n))
        rng.shuffle(order)
        pairs.extend(tuple(sorted(order[i:i + 2])) for i in range(0, n - 1, 2))
    return make_program(n, pairs, label="su4")


@dataclass(frozen=True)
class BenchInstance:
    name: str
    program: Program
    graph: CouplingGraph
    seed: int | None
    family: str


@dataclass(frozen=True)
class IterationPlan:
    """Alternating forward and mirrored schedules for repeated iterations."""

    schedules: tuple[tuple[Program, MappingSolution], ...]
    fidelities: tuple[float, ...]  # after 1..P iterations


def extend_iterations(
    s: MappingSolution,
    p: Program,
    g: CouplingGraph,
    p_iters: int,
    T0: float = DEFAULT_T0,
    fU: float = DEFAULT_FU,
) -> IterationPlan:
    """Repeat a schedule, running every even iteration backwards.

    The mirrored copy starts where the forward one ends, so no remapping is
    needed between iterations and each one costs the same.
    """
    if p_iters < 1:
        raise ValueError("iteration count must be at least 1")
    m = verify(p, g, s, T0, fU)
    back = (p.reversed(), reverse_solution(s, g))
    schedules = tuple((p, s) if k % 2 == 0 else back for k in range(p_iters))
    fids = tuple(multi_iteration_fidelity(m.fidelity, k) for k in range(1, p_iters + 1))
    return IterationPlan(schedules, fids)


def end_mapping(plan: IterationPlan, g: CouplingGraph) -> tuple[int, ...]:
    return plan.schedules[-1][1].final_mapping(g)


@dataclass
class ReportRow:
    family: str
    name: str
    n: int
    seed: int | None
    mode: str
    objective: str
    status: str
    depth: int | None = None
    swaps: int | None = None
    absorbed: int | None = None
    fidelity: float | None = None
    iteration_fidelities: list[float] = field(default_factory=list)
    wall_time: float = 0.0
    note: str = ""


@dataclass
class BenchReport:
    rows: list[ReportRow] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({"rows": [asdict(r) for r in self.rows]}, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = [f for f in ReportRow.__dataclass_fields__]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.rows:
            d = asdict(r)
            d["iteration_fidelities"] = ";".join(f"{x:.9f}" for x in r.iteration_fidelities)
            w.writerow(["" if d[c] is None else d[c] for c in cols])
        return buf.getvalue()

    def write(self, out: str | Path) -> list[Path]:
        """Write ``<out>.csv`` and ``<out>.json``."""
        base = Path(out)
        if base.suffix in (".csv", ".json"):
            base = base.with_suffix("")
        base.parent.mkdir(parents=True, exist_ok=True)
        paths = [base.with_suffix(".csv"), base.with_suffix(".json")]
        paths[0].write_text(self.to_csv())
        paths[1].write_text(self.to_json())
        return paths


def _solve_mode(inst: BenchInstance, mode: str, objective: str, b: Backend, jobs: int, kw: dict) -> MappingSolution:
    p, g = inst.program, inst.graph
    opts = EncodingOptions(1, absorption=mode != "absorb-off")
    if mode in ("exact", "absorb-off"):
        return solve_objective(p, g, opts, b, objective, **kw)
    if mode == "alternating":
        line_parity_classes(g)
        return alternating_phases(p, g, opts, b, objective, **kw)
    if mode == "fixed-initial":
        cands = initial_mapping_candidates(p, g)
        return portfolio_solve(p, g, opts, b, cands, jobs, objective, **kw)
    raise ValueError(f"unknown mode {mode!r}")


def run_one(
    inst: BenchInstance,
    mode: str,
    objective: str,
    b: Backend,
    *,
    iterations: int = 1,
    T0: float = DEFAULT_T0,
    fU: float = DEFAULT_FU,
    jobs: int = 1,
    **kw,
) -> tuple[ReportRow, MappingSolution | None]:
    row = ReportRow(inst.family, inst.name, inst.program.qubit_count, inst.seed, mode, objective, "ok")
    start = time.perf_counter()
    sol = None
    try:
        sol = _solve_mode(inst, mode, objective, b, jobs, dict(kw, T0=T0, fU=fU) if objective == "fidelity" else kw)
    except SolverTimeout as exc:
        row.status, row.note = "timeout", str(exc)
    except SolveError as exc:
        row.status, row.note = "infeasible", str(exc)
    except ArchError as exc:
        row.status, row.note = "skipped", str(exc)
    row.wall_time = time.perf_counter() - start
    if sol is None:
        return row, None
    bad = find_violations(inst.program, inst.graph, sol)
    if bad:
        row.status, row.note = "invalid", "; ".join(map(str, bad[:3]))
        return row, None
    m = metrics_of(inst.program, sol, T0, fU)
    row.depth, row.swaps, row.absorbed, row.fidelity = m.depth, m.swap_count, m.absorbed_count, m.fidelity
    row.iteration_fidelities = [multi_iteration_fidelity(m.fidelity, k) for k in range(1, iterations + 1)]
    return row, sol


def run_suite(
    instances: Sequence[BenchInstance],
    modes: Sequence[str],
    objective: str,
    b: Backend,
    *,
    iterations: int = 1,
    jobs: int = 1,
    T0: float = DEFAULT_T0,
    fU: float = DEFAULT_FU,
    **kw,
) -> BenchReport:
    """Solve every instance in every mode; rows come out in input order."""
    for m in modes:
        if m not in MODES:
            raise ValueError(f"unknown mode {m!r}; expected one of {', '.join(MODES)}")
    tasks = [(inst, m) for inst in instances for m in modes]

    def go(task):
        inst, mode = task
        row, _ = run_one(inst, mode, objective, b, iterations=iterations, T0=T0, fU=fU, **kw)
        log.info("%s %s: %s in %.2fs", inst.name, mode, row.status, row.wall_time)
        return row

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        rows = list(pool.map(go, tasks))
    return BenchReport(rows)


def make_instances(family: str, sizes: Sequence[int], seeds: Sequence[int], graph_for) -> list[BenchInstance]:
    """Instances of one family; ``graph_for(n)`` picks the coupling graph."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    out = []
    for n in sizes:
        if family == "all-to-all":
            out.append(BenchInstance(f"a2a-{n}", all_to_all_program(n), graph_for(n), None, family))
            continue
        for seed in seeds:
            if family == "qaoa-3reg":
                prog = qaoa_phase_program(gen_regular_graph(n, 3, seed), n)
                name = f"qaoa3-{n}-s{seed}"
            else:
                prog = qv_like_program(n, n, seed)
                name = f"qv-{n}-s{seed}"
            out.append(BenchInstance(name, prog, graph_for(n), seed, family))
    return out
