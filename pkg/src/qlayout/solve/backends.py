"""Satisfiability backends.

``external`` pipes SMT-LIB2 into a solver process (z3 by default) and
parses its ``sat``/``unsat`` answer and ``(get-model)`` output.
``internal`` answers the same question with the exhaustive search, reading
the instance (program, graph, options) rather than the clauses.
"""
from __future__ import annotations

import logging
import os
import shlex
import subprocess
import time
from dataclasses import dataclass, field

from ..encode import ConstraintSystem, emit_smtlib
from ..solution import solution_to_model
from .exhaustive import DEFAULT_MAX_T, DEFAULT_QUBIT_CAP, min_swaps_within

log = logging.getLogger(__name__)

SOLVER_ENV = "QLAYOUT_SOLVER"
DEFAULT_COMMAND = ("z3", "-in", "-smt2", "smt.arith.solver=2")


class BackendError(RuntimeError):
    """Solver could not be launched or produced unusable output."""


def default_command() -> tuple[str, ...]:
    env = os.environ.get(SOLVER_ENV)
    if env:
        return tuple(shlex.split(env))
    return DEFAULT_COMMAND


@dataclass(frozen=True)
class Backend:
    kind: str = "external"  # external | internal
    command: tuple[str, ...] = field(default_factory=default_command)
    timeout: float | None = None
    seed: int | None = None
    qubit_cap: int = DEFAULT_QUBIT_CAP
    t_cap: int = DEFAULT_MAX_T

    def __post_init__(self):
        if self.kind not in ("external", "internal"):
            raise ValueError(f"unknown backend kind {self.kind!r}")

    @classmethod
    def internal(cls, **kw) -> "Backend":
        return cls(kind="internal", **kw)


@dataclass(frozen=True)
class SolveOutcome:
    status: str  # sat | unsat | timeout
    model: dict | None
    wall_time: float

    @property
    def sat(self) -> bool:
        return self.status == "sat"


def check(cs: ConstraintSystem, b: Backend) -> SolveOutcome:
    if b.kind == "internal":
        return _check_internal(cs, b)
    return _check_external(cs, b)


def _check_internal(cs: ConstraintSystem, b: Backend) -> SolveOutcome:
    start = time.perf_counter()
    o = cs.options
    if o.alternating == "off":
        phases = [None]
    elif o.alternating == "either":
        phases = [0, 1]
    else:
        phases = [int(o.alternating[-1])]
    sol = None
    for phase in phases:
        cand = min_swaps_within(
            cs.program,
            cs.graph,
            cs.horizon,
            absorption=o.absorption,
            initial_mapping=o.initial_mapping,
            phase=phase,
            swap_budget=o.swap_budget,
            qubit_cap=b.qubit_cap,
            t_cap=b.t_cap,
        )
        if cand is not None and (sol is None or cand.swap_count < sol.swap_count):
            sol = cand
    elapsed = time.perf_counter() - start
    if sol is None:
        return SolveOutcome("unsat", None, elapsed)
    return SolveOutcome("sat", solution_to_model(sol, cs.vars, cs.graph), elapsed)


def _check_external(cs: ConstraintSystem, b: Backend) -> SolveOutcome:
    script = emit_smtlib(cs, seed=b.seed)
    start = time.perf_counter()
    try:
        proc = subprocess.run(
            list(b.command),
            input=script,
            capture_output=True,
            text=True,
            timeout=b.timeout,
        )
    except subprocess.TimeoutExpired:
        return SolveOutcome("timeout", None, time.perf_counter() - start)
    except OSError as exc:
        raise BackendError(f"cannot launch solver {b.command[0]!r}: {exc}") from exc
    elapsed = time.perf_counter() - start
    out = proc.stdout.strip()
    head, _, rest = out.partition("\n")
    head = head.strip()
    if head == "unsat":
        return SolveOutcome("unsat", None, elapsed)
    if head == "unknown":
        return SolveOutcome("timeout", None, elapsed)
    if head != "sat":
        raise BackendError(f"unexpected solver output: {out[:200]!r} {proc.stderr[:200]!r}")
    model = parse_model(rest)
    log.debug("sat at horizon %d in %.3fs", cs.horizon, elapsed)
    return SolveOutcome("sat", model, elapsed)


def _tokens(text: str) -> list[str]:
    out = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in "()":
            out.append(c)
            i += 1
        elif c.isspace():
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c == "|":
            j = text.index("|", i + 1)
            out.append(text[i + 1:j])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            out.append(text[i:j])
            i = j
    return out


def _sexprs(tokens: list[str]):
    stack: list[list] = [[]]
    for tok in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) < 2:
                raise BackendError("unbalanced parentheses in solver model")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise BackendError("unbalanced parentheses in solver model")
    return stack[0]


def _value(v):
    if isinstance(v, list):
        if len(v) == 2 and v[0] == "-":
            return -_value(v[1])
        raise BackendError(f"unsupported model value {v!r}")
    if v == "true":
        return True
    if v == "false":
        return False
    try:
        return int(v)
    except ValueError as exc:
        raise BackendError(f"unsupported model value {v!r}") from exc


def parse_model(text: str) -> dict:
    """Read ``define-fun`` entries from a get-model response."""
    model = {}
    for top in _sexprs(_tokens(text)):
        if not isinstance(top, list):
            continue
        items = top[1:] if top and top[0] == "model" else top
        for item in items:
            if isinstance(item, list) and len(item) == 5 and item[0] == "define-fun":
                _, name, args, _sort, val = item
                if args:
                    continue
                model[name] = _value(val)
    return model
