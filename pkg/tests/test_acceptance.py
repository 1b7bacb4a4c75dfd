"""Acceptance criteria, one test per criterion, each printing a verdict line.

Criteria 5 and 6 need benchmark instance files from the Biq Mac library;
they skip with an explanatory message when the files have not been fetched
(see scripts/fetch_biqmac.py).  Criterion 6 is a soft check and never gates.
"""

import itertools
import time
from pathlib import Path

import numpy as np
import pytest

import spindrive as sd
import spindrive.sudoku as sk
from spindrive.dmrg import SweepParams
from spindrive.driver import DriveParams, solve
from spindrive.ising import IsingModel, ising_energy, qubo_energy, to_ising, to_operator_terms
from spindrive.maxcut import cut_value, read_graph, to_qubo
from spindrive.mpo import OperatorTerm, compile_terms, expectation, mix
from spindrive.mps import SpinConfiguration, random_mps
from spindrive.oracle import brute_force_ground, dense_ground_energy, dense_matrix, statevector
from tests.conftest import random_ising
from tests.test_mps import isometry_residuals
from tests.test_sudoku import reconstruct_full_bits

BIQMAC_DIR = Path(__file__).parent / "data" / "biqmac"


def verdict(criterion: int, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    print(f"[acceptance] criterion {criterion}: {status} {detail}".rstrip())


def require_instance(name: str) -> Path:
    path = BIQMAC_DIR / name
    if not path.exists():
        pytest.skip(
            f"benchmark instance {name} not vendored (no network in the build "
            f"environment); run scripts/fetch_biqmac.py and re-run"
        )
    return path


def test_criterion_1_dmrg_vs_exact_diagonalization():
    """20 random mixed operators at n=8: DMRG within 1e-7 of dense."""
    t0 = time.time()
    worst = 0.0
    for k in range(20):
        rng = np.random.default_rng(2000 + k)
        n = 8
        couplings = {}
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                if rng.random() < 0.3:
                    couplings[(i, j)] = float(rng.uniform(-2, 2))
        model = IsingModel(n, couplings, tuple(rng.uniform(-1, 1, n)),
                           constant=float(rng.uniform(-1, 1)))
        hz_terms, coupling_terms, constant = to_operator_terms(model)
        hx_terms = [OperatorTerm(float(h), ((m, "Sx"),))
                    for m, h in enumerate(rng.uniform(0.2, 1.5, n), start=1)]
        a, b = (float(x) for x in rng.uniform(0.05, 0.95, 2))
        want = dense_ground_energy(hx_terms, hz_terms + coupling_terms, a, b, constant, n)
        mpo = mix(hx_terms, hz_terms + coupling_terms, a, b, constant, n)
        out = sd.run(random_mps(n, 4, seed=k), mpo,
                     SweepParams(max_bond=32, nsweeps=8), early_exit=False)
        worst = max(worst, abs(out.energy - want))
    elapsed = time.time() - t0
    ok = worst < 1e-7 and elapsed < 120
    verdict(1, ok, f"(worst |dE| = {worst:.2e}, {elapsed:.1f}s)")
    assert worst < 1e-7
    assert elapsed < 120


def test_criterion_2_qubo_ising_identity():
    """Exhaustive objective equality on all 4096 configurations, 10 models."""
    t0 = time.time()
    worst = 0.0
    n = 12
    for k in range(10):
        rng = np.random.default_rng(3000 + k)
        entries = {}
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                if i == j or rng.random() < 0.4:
                    entries[(i, j)] = float(rng.standard_normal())
        q = sd.QuboModel(n, entries, offset=float(rng.standard_normal()))
        model = to_ising(q)
        for idx in range(1 << n):
            bits = [(idx >> (n - m)) & 1 for m in range(1, n + 1)]
            config = SpinConfiguration(tuple(0.5 if b else -0.5 for b in bits))
            worst = max(worst, abs(qubo_energy(q, bits) - ising_energy(model, config)))
    elapsed = time.time() - t0
    ok = worst < 1e-9 and elapsed < 30
    verdict(2, ok, f"(worst |dE| = {worst:.2e}, {elapsed:.1f}s)")
    assert worst < 1e-9
    assert elapsed < 30


def test_criterion_3_sudoku_pipeline_identity(full_qubo_3):
    """Exact clamp identity on tiny boards; uniform couplings; zero optimum."""
    rng = np.random.default_rng(4000)
    # engineered boards with at most 16 free variables, checked exhaustively
    for case in range(5):
        solution = sk.random_solution(rng)
        cells = [list(row) for row in solution.cells]
        for flat in rng.choice(81, size=3 + case % 3, replace=False):
            cells[flat // 9][flat % 9] = 0
        puzzle = sk.Board(3, tuple(tuple(r) for r in cells))
        reduced, cmap = sd.clamp(puzzle, full_qubo_3)
        assert cmap.n_free <= 16
        for bits in itertools.product([0, 1], repeat=cmap.n_free):
            full_bits = reconstruct_full_bits(puzzle, cmap, list(bits))
            assert qubo_energy(reduced, list(bits)) == qubo_energy(full_qubo_3, full_bits)
    # standard-size puzzles: every coupling equals 2, valid solutions cost 0
    for seed in (1, 2, 3):
        puzzle, solution = sk.make_puzzle(24, np.random.default_rng(seed))
        reduced, cmap = sd.clamp(puzzle, full_qubo_3)
        model = to_ising(reduced)
        assert set(model.couplings.values()) == {2.0}
        config = sk.solution_configuration(solution, cmap)
        assert ising_energy(model, config) == 0.0
    verdict(3, True)


def test_criterion_4_driver_vs_oracle():
    """>= 45 of 50 random 16-spin models driven to the brute-force optimum."""
    t0 = time.time()
    hits = 0
    for k in range(50):
        rng = np.random.default_rng(1000 + k)
        model = random_ising(16, rng, density=0.3)
        oracle = brute_force_ground(model)
        params = DriveParams(m_steps=5, hx=1.0, eta=0.0,
                             sweep=SweepParams(max_bond=16, nsweeps=5),
                             seed=k, max_restarts=5,
                             target_energy=oracle.best_energy)
        report = solve(model, params)
        hits += abs(report.final_energy - oracle.best_energy) < 1e-9
    elapsed = time.time() - t0
    ok = hits >= 45 and elapsed < 900
    verdict(4, ok, f"({hits}/50 reached the optimum, {elapsed:.0f}s)")
    assert hits >= 45
    assert elapsed < 900


def _solve_instance(path: Path, reference: int, m_steps: int, hx: float,
                    eta: float, bond: int, restarts: int, seed: int = 0):
    graph = read_graph(path)
    model = to_ising(to_qubo(graph))
    params = DriveParams(m_steps=m_steps, hx=hx, eta=eta,
                         sweep=SweepParams(max_bond=bond, nsweeps=5),
                         seed=seed, max_restarts=restarts,
                         target_energy=float(reference))
    report = solve(model, params)
    cut = cut_value(graph, report.final_configuration.as_binary())
    return report, cut


def test_criterion_5_weighted_maxcut_reproduction():
    """The 80-vertex weighted instance reaches its published optimum."""
    path = require_instance("pm1s_80.0")
    t0 = time.time()
    report, cut = _solve_instance(path, -79, m_steps=5, hx=1.0, eta=0.0,
                                  bond=30, restarts=10)
    elapsed = time.time() - t0
    ok = report.final_energy == -79 and cut == 79 and elapsed < 1800
    verdict(5, ok, f"(energy {report.final_energy}, cut {cut}, "
                   f"{report.restarts_used} restarts, {elapsed:.0f}s)")
    assert report.final_energy == -79
    assert cut == 79
    assert elapsed < 1800
    # soft companions; reported, not gating
    for name, reference in (("pm1s_80.1", -69), ("pm1s_80.3", -66)):
        companion = BIQMAC_DIR / name
        if not companion.exists():
            continue
        rep, c = _solve_instance(companion, reference, m_steps=5, hx=1.0,
                                 eta=0.0, bond=30, restarts=10)
        print(f"[acceptance] criterion 5 companion {name}: "
              f"energy {rep.final_energy} (target {reference}), cut {c}")


def test_criterion_6_unweighted_maxcut_spot_check():
    """Soft: the dense 60-vertex unweighted instance; misses do not gate."""
    path = require_instance("g05_60.0")
    report, cut = _solve_instance(path, -536, m_steps=10, hx=1.0, eta=0.3,
                                  bond=30, restarts=10)
    reached = report.final_energy == -536
    verdict(6, reached, f"(energy {report.final_energy}, cut {cut}; soft)")
    if not reached:
        pytest.xfail(f"soft criterion: best energy {report.final_energy} vs -536")


@pytest.fixture(scope="module")
def sudoku_run(full_qubo_3):
    """One end-to-end driven solve of a generated standard puzzle."""
    rng = np.random.default_rng(7)
    puzzle, solution = sk.make_puzzle(25, rng)
    reduced, cmap = sd.clamp(puzzle, full_qubo_3)
    while cmap.n_free < 180:
        puzzle, solution = sk.make_puzzle(25, rng)
        reduced, cmap = sd.clamp(puzzle, full_qubo_3)
    model = to_ising(reduced)
    params = DriveParams(m_steps=10, hx=0.75, eta=0.0,
                         sweep=SweepParams(max_bond=20, nsweeps=5),
                         init="random", init_bond=3,
                         seed=7, max_restarts=4, target_energy=0.0)
    t0 = time.time()
    report = solve(model, params, n_up_ground=81 - puzzle.clue_count())
    elapsed = time.time() - t0
    return puzzle, cmap, model, report, elapsed


def test_criterion_7_end_to_end_sudoku(sudoku_run):
    puzzle, cmap, model, report, elapsed = sudoku_run
    result = sd.decode(report.final_configuration, cmap, puzzle)
    valid = result.ok and sd.verify(result.board).valid
    n_up = sum(1 for v in report.final_configuration.values if v > 0)
    ok = (report.final_energy == 0.0 and valid
          and n_up == 81 - puzzle.clue_count() and elapsed < 3600)
    verdict(7, ok, f"(N_s = {cmap.n_free}, energy {report.final_energy}, "
                   f"{report.restarts_used} restarts, {elapsed:.0f}s)")
    assert cmap.n_free >= 180
    assert report.final_energy == 0.0
    assert valid
    assert n_up == 81 - puzzle.clue_count()
    assert elapsed < 3600


def test_criterion_8_trace_properties(sudoku_run):
    puzzle, cmap, model, report, _ = sudoku_run
    final = report.steps[-1]
    n = model.n
    ok = (abs(final.sx_total) <= 1e-6 * n
          and abs(final.sz_total) <= 1e-6 * n
          and report.final_bond_dim == 1)
    verdict(8, ok, f"(|Sx| = {abs(final.sx_total):.2e}, "
                   f"|Sz offset| = {abs(final.sz_total):.2e}, "
                   f"final bond {report.final_bond_dim})")
    assert abs(final.sx_total) <= 1e-6 * n
    assert abs(final.sz_total) <= 1e-6 * n
    assert report.final_bond_dim == 1
    assert len(final.site_sz) == n


def test_criterion_9_module_invariants():
    """Compact re-run of the cross-module invariant checks."""
    rng = np.random.default_rng(5000)

    # canonical-form residuals after a DMRG run
    n = 8
    terms = [OperatorTerm(1.0, ((m, "Sz"), (m + 1, "Sz"))) for m in range(1, n)]
    terms += [OperatorTerm(1.0, ((m, "Sx"),)) for m in range(1, n + 1)]
    mpo = compile_terms(terms, n)
    out = sd.run(random_mps(n, 3, seed=1), mpo, SweepParams(max_bond=16, nsweeps=3))
    assert isometry_residuals(out.state) < 1e-10

    # variational dominance against the dense oracle
    exact = float(np.linalg.eigvalsh(dense_matrix(terms, n))[0])
    assert out.energy >= exact - 1e-9

    # cut/QUBO duality on a random graph
    from spindrive.maxcut import Graph

    edges = []
    for i in range(1, 11):
        for j in range(i + 1, 11):
            if rng.random() < 0.4:
                edges.append((i, j, int(rng.choice([-2, -1, 1, 2]))))
    graph = Graph(10, tuple(edges))
    q = to_qubo(graph)
    model = to_ising(q)
    assert model.hz == (0.0,) * 10  # fields vanish for every cut image
    for idx in range(1 << 10):
        x = [(idx >> (10 - m)) & 1 for m in range(1, 11)]
        assert qubo_energy(q, x) == -cut_value(graph, x)

    # MPO expectation equals a dense matrix element on random states
    terms = []
    for i in range(1, 7):
        for j in range(i + 1, 7):
            if rng.random() < 0.6:
                terms.append(OperatorTerm(float(rng.standard_normal()),
                                          ((i, "Sz"), (j, "Sz"))))
    terms.append(OperatorTerm(0.9, ((3, "Sx"),)))
    mpo = compile_terms(terms, 6)
    h = dense_matrix(terms, 6)
    for seed in range(3):
        psi = random_mps(6, 4, seed=seed)
        v = statevector(psi)
        assert expectation(psi, mpo) == pytest.approx(float(v @ h @ v), abs=1e-9)

    verdict(9, True)
