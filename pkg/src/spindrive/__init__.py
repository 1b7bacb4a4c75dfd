"""Quantum-inspired QUBO solving with driven matrix product states.

A QUBO (or MaxCut graph, or Sudoku board) is mapped exactly to a spin model
with pair couplings and site fields; a discrete driving schedule mixes a
transverse-field driver with the problem operator, refining a matrix product
state with DMRG sweeps at every step until the ground configuration can be
read out classically.
"""

from .dmrg import DmrgError, SweepOutcome, SweepParams, local_eigensolve, run, sweep
from .driver import (
    DriveParams,
    RunReport,
    StepRecord,
    linear_schedule,
    noisy_transverse_field,
    solve,
    trace_observables,
)
from .ising import (
    GlassProfile,
    IsingModel,
    QuboModel,
    characterize,
    ising_energy,
    qubo_energy,
    rescale,
    to_ising,
    to_operator_terms,
)
from .maxcut import Graph, cut_value, parse_biqmac, to_qubo
from .mpo import MatrixProductOperator, OperatorTerm, compile_terms, expectation, mix
from .mps import (
    MatrixProductState,
    SpinConfiguration,
    canonicalize,
    expect_site,
    inner,
    minus_product_state,
    random_mps,
    readout,
    site_expectations,
    total_spin_traces,
)
from .oracle import OracleResult, brute_force_ground, dense_ground_energy, dense_matrix
from .sudoku import (
    Board,
    ClampMap,
    InconsistentCluesError,
    clamp,
    decode,
    full_qubo,
    make_puzzle,
    parse_board,
    random_solution,
    verify,
)
from .tensor import DenseTensor, SvdResult, contract, svd_split

__version__ = "0.1.0"
