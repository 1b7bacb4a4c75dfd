"""The driving loop: hop along a discrete schedule, sweep, repeat.

Each step i mixes the transverse-field driver with the problem operator as
a_i * Hx + b_i * Hz, refines the state with DMRG sweeps starting from the
previous step's state, and records observable traces.  The schedule is
linear and ends at the pure problem operator, where the state collapses to a
product state and is read out classically.  Runs that miss a requested
target energy restart from a fresh low-bond random state on an independent
PRNG stream.

The reported solution energy is always recomputed classically from the
read-out configuration against the unscaled model, never taken from the MPS
expectation value.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, asdict

from . import dmrg, mps as mps_mod
from .dmrg import SweepParams
from .ising import IsingModel, ising_energy, rescale, to_operator_terms
from .mpo import OperatorTerm, mix
from .mps import (
    SZ,
    STREAM_NOISE,
    STREAM_STATE_INIT,
    MatrixProductState,
    SpinConfiguration,
    minus_product_state,
    rng_stream,
    site_expectations,
    total_spin_traces,
)

__all__ = [
    "DriveParams",
    "StepRecord",
    "RunReport",
    "linear_schedule",
    "noisy_transverse_field",
    "trace_observables",
    "solve",
]


@dataclass(frozen=True)
class DriveParams:
    """Everything one driven run depends on (besides the model itself)."""

    m_steps: int = 10
    hx: float = 1.0
    eta: float = 0.0
    sweep: SweepParams = field(default_factory=lambda: SweepParams(max_bond=20))
    init: str = "minus"          # "minus" or "random"
    init_bond: int = 3           # bond dimension of a random initial state
    seed: int = 0
    max_restarts: int = 0
    target_energy: float | None = None
    rescale: bool = False
    early_exit: bool = False     # per-step DMRG early exit; sweep counts are fixed by default
    redraw_noise_each_step: bool = True
    restart_init_bond: int = 3

    def __post_init__(self):
        if self.m_steps < 2:
            raise ValueError(f"m_steps must be >= 2, got {self.m_steps}")
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if self.max_restarts < 0:
            raise ValueError(f"max_restarts must be >= 0, got {self.max_restarts}")
        if self.init not in ("minus", "random"):
            raise ValueError(f"init must be 'minus' or 'random', got {self.init!r}")
        if self.init_bond < 1 or self.restart_init_bond < 1:
            raise ValueError("initial bond dimensions must be >= 1")


@dataclass(frozen=True)
class StepRecord:
    step: int
    a: float
    b: float
    energy: float
    sx_total: float
    sz_total: float
    site_sz: tuple[float, ...]
    max_bond: int
    wall_time: float


@dataclass(frozen=True)
class RunReport:
    steps: tuple[StepRecord, ...]
    final_configuration: SpinConfiguration
    final_energy: float
    final_mps_energy: float
    final_bond_dim: int
    restarts_used: int
    converged: bool
    seed: int
    scale_factor: float
    n_up_ground: int | None
    params: dict

    def to_json_dict(self) -> dict:
        d = {
            "steps": [asdict(s) for s in self.steps],
            "final_configuration": list(self.final_configuration.values),
            "final_energy": self.final_energy,
            "final_mps_energy": self.final_mps_energy,
            "final_bond_dim": self.final_bond_dim,
            "restarts_used": self.restarts_used,
            "converged": self.converged,
            "seed": self.seed,
            "scale_factor": self.scale_factor,
            "n_up_ground": self.n_up_ground,
            "params": self.params,
        }
        for s in d["steps"]:
            s["site_sz"] = list(s["site_sz"])
        return d


def linear_schedule(m_steps: int) -> list[tuple[float, float]]:
    """(a_i, b_i) = (1 - i/M, i/M) for i = 1..M; the last pair is (0, 1)."""
    if m_steps < 2:
        raise ValueError(f"need at least 2 steps, got {m_steps}")
    return [(1.0 - i / m_steps, i / m_steps) for i in range(1, m_steps + 1)]


def noisy_transverse_field(n: int, hx: float, eta: float, rng) -> list[float]:
    """Per-site fields hx + eta_m with eta_m uniform on (-eta, eta)."""
    if eta < 0:
        raise ValueError(f"eta must be >= 0, got {eta}")
    if eta == 0.0:
        return [hx] * n
    return [hx + float(e) for e in rng.uniform(-eta, eta, size=n)]


def trace_observables(state: MatrixProductState, mpo, n_up_ground: int | None = None):
    """(energy incl. constant, total Sx, offset total Sz, per-site Sz row)."""
    from .mpo import expectation

    energy = expectation(state, mpo)
    sx_total, sz_total = total_spin_traces(state, n_up_ground)
    return energy, sx_total, sz_total, site_expectations(state, SZ)


def _initial_state(params: DriveParams, n: int, attempt: int) -> MatrixProductState:
    if attempt == 0 and params.init == "minus":
        return minus_product_state(n)
    bond = params.init_bond if attempt == 0 else params.restart_init_bond
    rng = rng_stream(params.seed, STREAM_STATE_INIT, attempt)
    return mps_mod._uniform_mps(n, bond, rng)


def _run_attempt(model: IsingModel, params: DriveParams, attempt: int,
                 n_up_ground: int | None,
                 initial_state: MatrixProductState | None,
                 checkpoint_path=None) -> tuple:
    n = model.n
    hz_terms, coupling_terms, constant = to_operator_terms(model)
    z_terms = coupling_terms + hz_terms
    base = list(model.hx_base) if model.hx_base is not None else [params.hx] * n

    state = initial_state if initial_state is not None else _initial_state(params, n, attempt)
    if state.n_sites != n:
        raise ValueError(f"initial state has {state.n_sites} sites for {n} spins")

    fixed_noise = None
    if not params.redraw_noise_each_step:
        rng = rng_stream(params.seed, STREAM_NOISE, attempt, 0)
        fixed_noise = noisy_transverse_field(n, 0.0, params.eta, rng)

    records = []
    out = None
    for i, (a, b) in enumerate(linear_schedule(params.m_steps), start=1):
        t0 = time.perf_counter()
        if fixed_noise is not None:
            noise = fixed_noise
        else:
            rng = rng_stream(params.seed, STREAM_NOISE, attempt, i)
            noise = noisy_transverse_field(n, 0.0, params.eta, rng)
        fields = [h + e for h, e in zip(base, noise)]
        hx_terms = [OperatorTerm(f, ((m, "Sx"),))
                    for m, f in enumerate(fields, start=1) if f != 0.0]
        h_i = mix(hx_terms, z_terms, a, b, constant, n)
        try:
            out = dmrg.run(state, h_i, params.sweep, early_exit=params.early_exit)
        except dmrg.DmrgError as exc:
            raise dmrg.DmrgError(f"driving step {i}: {exc}", bond=exc.bond) from exc
        state = out.state
        sx_total, sz_total = total_spin_traces(state, n_up_ground)
        records.append(StepRecord(
            step=i, a=a, b=b, energy=out.energy,
            sx_total=sx_total, sz_total=sz_total,
            site_sz=tuple(site_expectations(state, SZ)),
            max_bond=out.max_bond_reached,
            wall_time=time.perf_counter() - t0,
        ))
        if checkpoint_path is not None:
            mps_mod.save_checkpoint(state, checkpoint_path)
    config = mps_mod.readout(state)
    if state.max_bond() > 1:
        # The final state kept several classical branches (degenerate or
        # symmetry-protected grounds); per-site thresholding can then mix
        # branches.  Collapse one branch coherently and keep the better.
        branch = mps_mod.collapse_readout(state)
        if ising_energy(model, branch) < ising_energy(model, config):
            config = branch
    return records, config, out.energy, state.max_bond()


def solve(model: IsingModel, params: DriveParams,
          n_up_ground: int | None = None,
          initial_state: MatrixProductState | None = None,
          checkpoint_path=None) -> RunReport:
    """Drive the model to its ground state; restart on a missed target.

    Restart r draws its initial state and noise from PRNG streams derived
    from (seed, r), so runs are reproducible and restarts independent.  The
    best attempt (lowest recomputed classical energy) is returned.  When
    `checkpoint_path` is given, the working state is written there after
    every driving step so interrupted runs can resume via `initial_state`.
    """
    if model.n < 1:
        raise ValueError("model is empty")
    work_model, factor = (rescale(model) if params.rescale else (model, 1.0))
    best = None
    restarts_used = 0
    for attempt in range(params.max_restarts + 1):
        restarts_used = attempt
        records, config, mps_energy, final_bond = _run_attempt(
            work_model, params, attempt, n_up_ground,
            initial_state if attempt == 0 else None,
            checkpoint_path=checkpoint_path)
        energy = ising_energy(model, config)
        candidate = (energy, attempt, records, config, mps_energy, final_bond)
        if best is None or candidate[0] < best[0]:
            best = candidate
        if params.target_energy is None:
            break
        if energy <= params.target_energy + 1e-9:
            break
    energy, _, records, config, mps_energy, final_bond = best
    reached = params.target_energy is None or energy <= params.target_energy + 1e-9
    return RunReport(
        steps=tuple(records),
        final_configuration=config,
        final_energy=energy,
        final_mps_energy=mps_energy * factor,
        final_bond_dim=final_bond,
        restarts_used=restarts_used,
        converged=reached,
        seed=params.seed,
        scale_factor=factor,
        n_up_ground=n_up_ground,
        params=_params_echo(params),
    )


def _params_echo(params: DriveParams) -> dict:
    d = asdict(params)
    d["sweep"] = asdict(params.sweep)
    return d
