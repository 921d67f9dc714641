from .backends import Backend, BackendError, SolveOutcome, check, parse_model
from .drivers import (
    DepthCertificate,
    SolveError,
    SolverTimeout,
    SolveStats,
    alternating_phases,
    certify_depth,
    initial_mapping_candidates,
    maximize_fidelity,
    minimize_depth,
    minimize_swaps,
    pareto_frontier,
    portfolio_solve,
    solve_objective,
)
from .exhaustive import CapExceeded, ExhaustiveResult, internal_exhaustive, min_swaps_within
