"""Optimal qubit mapping with SWAP absorption, solved through SMT."""
from .arch import CouplingGraph, arch_from_spec, build_grid, build_line, build_sycamore_like
from .encode import EncodingOptions, build, emit_smtlib
from .program import Gate, Program, dependencies, load_program, make_program
from .solution import (
    MappingSolution,
    Metrics,
    decode,
    fidelity,
    multi_iteration_fidelity,
    postprocess_absorb,
    verify,
)
from .solve import (
    Backend,
    certify_depth,
    initial_mapping_candidates,
    internal_exhaustive,
    maximize_fidelity,
    minimize_depth,
    minimize_swaps,
    portfolio_solve,
)

__version__ = "0.1.0"
