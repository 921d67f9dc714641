"""Command-line entry point.

Exit codes: 0 success, 1 verification failure or no solution, 2 usage or
input error, 3 solver timeout.
"""
from __future__ import annotations

import argparse
import json
import logging
import shlex
import sys
from dataclasses import replace
from pathlib import Path

from .arch import ArchError, CouplingGraph, arch_from_spec, build_line, build_sycamore_like
from .bench import FAMILIES, MODES, make_instances, run_suite
from .encode import EncodingError, EncodingOptions, build, emit_smtlib
from .program import ProgramError, load_program
from .solution import (
    DEFAULT_FU,
    DEFAULT_T0,
    SolutionFormatError,
    VerificationError,
    find_violations,
    load_solution,
    metrics_of,
    postprocess_absorb,
)
from .solve.backends import Backend, BackendError, default_command
from .solve.drivers import (
    SolveError,
    SolverTimeout,
    certify_depth,
    initial_mapping_candidates,
    portfolio_solve,
    solve_objective,
)

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_TIMEOUT = 0, 1, 2, 3

log = logging.getLogger("qlayout")


class UsageError(Exception):
    pass


def _on_off(v: str) -> bool:
    if v not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return v == "on"


def _add_instance(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--program", required=True, help="program JSON file")
    ap.add_argument("--arch", required=True, help="line:N, grid:RxC, sycamore:RxC or file:PATH")


def _add_mode(ap: argparse.ArgumentParser, alternating_default: str = "off") -> None:
    ap.add_argument("--absorb", type=_on_off, default=True, metavar="{on,off}", help="SWAP absorption (default on)")
    ap.add_argument(
        "--alternating",
        choices=("off", "auto", "on", "phase0", "phase1", "either"),
        default=alternating_default,
        help="alternating-matchings reduction; auto applies it only on line graphs",
    )
    ap.add_argument("--initial-mapping", help="JSON file with a fixed initial mapping, or 'portfolio'")
    ap.add_argument("--reduce-best-effort", action="store_true",
                    help="drop reductions that do not apply to the architecture instead of failing")


def _add_backend(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--backend", choices=("external", "internal"), default="external")
    ap.add_argument("--solver-cmd", help="external solver command line (default: $QLAYOUT_SOLVER or z3)")
    ap.add_argument("--timeout", type=float, help="seconds per solver check")
    ap.add_argument("--seed", type=int, help="solver random seed")
    ap.add_argument("--jobs", type=int, default=1, help="parallel solver instances")
    ap.add_argument("--max-horizon", type=int, help="deepening cap (default: the larger of 2 x qubits and twice the depth lower bound)")


def _add_fidelity(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--T0", type=float, default=DEFAULT_T0, help="coherence time in steps")
    ap.add_argument("--fU", type=float, default=DEFAULT_FU, help="two-qubit gate fidelity")


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qlayout", description="Optimal qubit mapping with SWAP absorption.")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="find an optimal mapping")
    _add_instance(s)
    s.add_argument("--objective", choices=("depth", "swap", "fidelity"), default="depth")
    _add_mode(s)
    s.add_argument("--horizon-slack", type=int, default=0)
    s.add_argument("--swap-search", choices=("linear", "binary"), default="linear")
    s.add_argument("--postprocess", action="store_true", help="fold explicit SWAPs into gates afterwards")
    _add_backend(s)
    _add_fidelity(s)
    s.add_argument("--out", help="solution JSON path; metrics go next to it")

    v = sub.add_parser("verify", help="check a solution file")
    _add_instance(v)
    v.add_argument("--solution", required=True)
    _add_fidelity(v)

    e = sub.add_parser("emit-smt", help="write the SMT-LIB2 script for one horizon")
    _add_instance(e)
    e.add_argument("--horizon", type=int, required=True)
    e.add_argument("--absorb", type=_on_off, default=True, metavar="{on,off}")
    e.add_argument("--alternating", choices=("off", "phase0", "phase1", "either"), default="off")
    e.add_argument("--initial-mapping")
    e.add_argument("--swap-budget", type=int)
    e.add_argument("--no-symmetry-breaking", action="store_true")
    e.add_argument("--seed", type=int)
    e.add_argument("--out", help="output path (default stdout)")

    c = sub.add_parser("certify", help="solve a reduced instance and certify its depth")
    _add_instance(c)
    _add_mode(c, alternating_default="auto")
    _add_backend(c)
    _add_fidelity(c)
    c.add_argument("--out", help="solution JSON path; the certificate goes next to it")

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--family", choices=FAMILIES, required=True)
    b.add_argument("--n", type=int, nargs="+", required=True)
    b.add_argument("--seed", type=int, nargs="+", default=[1])
    b.add_argument("--modes", nargs="+", choices=MODES, default=["exact"])
    b.add_argument("--objective", choices=("depth", "swap", "fidelity"), default="swap")
    b.add_argument("--iterations", type=int, default=1)
    b.add_argument("--arch", default="line", help="line, sycamore:RxC, grid:RxC or file:PATH")
    b.add_argument("--backend", choices=("external", "internal"), default="external")
    b.add_argument("--solver-cmd")
    b.add_argument("--timeout", type=float)
    b.add_argument("--solver-seed", type=int)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--max-horizon", type=int)
    _add_fidelity(b)
    b.add_argument("--out", required=True, help="report path stem; writes .csv and .json")
    return ap


def _backend(args) -> Backend:
    cmd = tuple(shlex.split(args.solver_cmd)) if getattr(args, "solver_cmd", None) else default_command()
    seed = getattr(args, "solver_seed", None) if args.command == "bench" else args.seed
    return Backend(kind=args.backend, command=cmd, timeout=args.timeout, seed=seed)


def _read_mapping(path: str, n: int) -> tuple[int, ...]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read initial mapping {path}: {exc}") from exc
    if isinstance(data, dict) and "mapping" in data:
        data = data["mapping"]
    if isinstance(data, dict):
        try:
            data = [data[str(q)] for q in range(n)]
        except KeyError as exc:
            raise UsageError(f"initial mapping misses program qubit {exc}") from exc
    if not isinstance(data, list) or not all(isinstance(x, int) for x in data):
        raise UsageError("initial mapping must be a list of physical qubits")
    return tuple(data)


def _alternating(args, g: CouplingGraph) -> str:
    """Alternating-matching setting to encode with."""
    mode = args.alternating
    if mode == "off":
        return "off"
    if g.kind != "line":
        if mode == "auto":
            return "off"
        if args.reduce_best_effort:
            log.warning("alternating matchings need a line architecture; running without them")
            return "off"
        raise UsageError("alternating matchings need a line architecture (use --reduce-best-effort to ignore)")
    return "either" if mode in ("auto", "on") else mode


def _write_json(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _side_path(out: Path, tag: str) -> Path:
    return out.with_name(out.stem + f".{tag}.json")


def cmd_solve(args) -> int:
    p, g = load_program(args.program), arch_from_spec(args.arch)
    b = _backend(args)
    opts = EncodingOptions(1, absorption=args.absorb, alternating=_alternating(args, g))
    kw = dict(horizon_slack=args.horizon_slack, strategy=args.swap_search, max_horizon=args.max_horizon)
    if args.objective == "fidelity":
        kw.update(T0=args.T0, fU=args.fU)
    if args.initial_mapping == "portfolio":
        cands = initial_mapping_candidates(p, g)
        log.info("portfolio of %d initial mappings", len(cands))
        sol = portfolio_solve(p, g, opts, b, cands, args.jobs, args.objective, **kw)
    else:
        if args.initial_mapping:
            opts = replace(opts, initial_mapping=_read_mapping(args.initial_mapping, p.qubit_count))
        sol = solve_objective(p, g, opts, b, args.objective, **kw)
    if args.postprocess:
        sol = postprocess_absorb(sol, p, g)
    bad = find_violations(p, g, sol)
    if bad:
        for v in bad:
            print(v, file=sys.stderr)
        return EXIT_INVALID
    m = metrics_of(p, sol, args.T0, args.fU)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(sol.dumps())
        _write_json(_side_path(out, "metrics"), m.__dict__)
    print(m.summary())
    return EXIT_OK


def cmd_verify(args) -> int:
    p, g = load_program(args.program), arch_from_spec(args.arch)
    s = load_solution(args.solution)
    bad = find_violations(p, g, s)
    if bad:
        print(f"{len(bad)} violation(s):")
        for v in bad:
            print(f"  {v} {list(v.indices)}")
        return EXIT_INVALID
    print(metrics_of(p, s, args.T0, args.fU).summary())
    return EXIT_OK


def cmd_emit(args) -> int:
    p, g = load_program(args.program), arch_from_spec(args.arch)
    im = _read_mapping(args.initial_mapping, p.qubit_count) if args.initial_mapping else None
    opts = EncodingOptions(
        args.horizon,
        absorption=args.absorb,
        alternating=args.alternating,
        initial_mapping=im,
        swap_budget=args.swap_budget,
        symmetry_breaking=not args.no_symmetry_breaking,
    )
    text = emit_smtlib(build(p, g, opts), seed=args.seed)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_certify(args) -> int:
    p, g = load_program(args.program), arch_from_spec(args.arch)
    b = _backend(args)
    base = EncodingOptions(1, absorption=args.absorb)
    if args.initial_mapping:
        if args.initial_mapping == "portfolio":
            raise UsageError("certify takes a fixed initial mapping, not a portfolio")
        base = replace(base, initial_mapping=_read_mapping(args.initial_mapping, p.qubit_count))
    reduced = replace(base, alternating=_alternating(args, g))
    exact = EncodingOptions(1, absorption=args.absorb)
    sol, cert = certify_depth(p, g, reduced, b, exact=exact, max_horizon=args.max_horizon)
    m = metrics_of(p, sol, args.T0, args.fU)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(sol.dumps())
        _write_json(_side_path(out, "metrics"), m.__dict__)
        if cert is not None:
            _write_json(_side_path(out, "certificate"), cert.to_dict())
    print(m.summary())
    if cert is None:
        print("certificate: none (exact check timed out)")
        return EXIT_TIMEOUT
    print(f"certificate: no solution with depth < {cert.certified_floor}")
    return EXIT_OK


def _graph_factory(spec: str):
    if spec == "line":
        return build_line
    if spec.startswith("sycamore:") or spec.startswith("grid:") or spec.startswith("file:"):
        g = arch_from_spec(spec)

        def fixed(n: int) -> CouplingGraph:
            if n > g.qubit_count:
                raise UsageError(f"{spec} has {g.qubit_count} qubits, instance needs {n}")
            return g
        return fixed
    if spec == "sycamore":
        # smallest near-square patch with room for n qubits
        def syc(n: int) -> CouplingGraph:
            rows = 2
            while rows * rows < n:
                rows += 1
            cols = -(-n // rows)
            return build_sycamore_like(rows, cols)
        return syc
    raise UsageError(f"unknown bench architecture {spec!r}")


def cmd_bench(args) -> int:
    if args.iterations < 1:
        raise UsageError("--iterations must be at least 1")
    insts = make_instances(args.family, args.n, args.seed, _graph_factory(args.arch))
    kw = {"max_horizon": args.max_horizon}
    report = run_suite(insts, args.modes, args.objective, _backend(args),
                       iterations=args.iterations, jobs=args.jobs, T0=args.T0, fU=args.fU, **kw)
    paths = report.write(args.out)
    for r in report.rows:
        if r.status == "ok":
            print(f"{r.name:<16} {r.mode:<13} depth={r.depth} swaps={r.swaps} absorbed={r.absorbed} "
                  f"fidelity={r.fidelity:.6f} time={r.wall_time:.2f}s")
        else:
            print(f"{r.name:<16} {r.mode:<13} {r.status}: {r.note}")
    print("wrote " + ", ".join(str(x) for x in paths))
    if any(r.status == "invalid" for r in report.rows):
        return EXIT_INVALID
    if any(r.status == "timeout" for r in report.rows):
        return EXIT_TIMEOUT
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "emit-smt": cmd_emit,
    "certify": cmd_certify,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    ap = parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except SolverTimeout as exc:
        floor = f" (no solution below depth {exc.certified_floor})" if exc.certified_floor else ""
        print(f"timeout: {exc}{floor}", file=sys.stderr)
        return EXIT_TIMEOUT
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SolveError as exc:
        print(f"no solution: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (UsageError, ProgramError, ArchError, EncodingError, SolutionFormatError, BackendError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
