"""QUBO model, the spin-image transformation, and glass statistics."""

import numpy as np
import pytest

import spindrive.mps as mps
from spindrive.ising import (
    IsingModel,
    QuboModel,
    characterize,
    ising_energy,
    qubo_energy,
    qubo_from_json,
    qubo_to_json,
    read_qubo,
    rescale,
    to_ising,
    to_operator_terms,
    write_qubo,
)
from spindrive.mpo import compile_terms, expectation
from spindrive.mps import SpinConfiguration


def spins_of_bits(bits):
    return SpinConfiguration(tuple(0.5 if b else -0.5 for b in bits))


def random_qubo(n, rng, density=0.5):
    entries = {}
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            if i == j or rng.random() < density:
                entries[(i, j)] = float(rng.standard_normal())
    return QuboModel(n, entries, offset=float(rng.standard_normal()))


class TestQuboModel:
    def test_symmetrizes_entries(self):
        q = QuboModel(3, [(2, 1, 0.5), (1, 2, 0.25)])
        assert q.entries == {(1, 2): 0.75}

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            QuboModel(2, [(1, 3, 1.0)])

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            QuboModel(2, [(1, 2, float("nan"))])

    def test_energy_formula(self):
        q = QuboModel(2, {(1, 1): 2.0, (1, 2): 3.0, (2, 2): -1.0}, offset=10.0)
        assert qubo_energy(q, [0, 0]) == 10.0
        assert qubo_energy(q, [1, 0]) == 12.0
        assert qubo_energy(q, [0, 1]) == 9.0
        assert qubo_energy(q, [1, 1]) == 10.0 + 2.0 - 1.0 + 2 * 3.0


class TestToIsing:
    def test_single_variable(self):
        q = QuboModel(1, {(1, 1): 1.0})
        model = to_ising(q)
        assert model.hz == (1.0,)
        assert model.constant == pytest.approx(0.5)
        assert ising_energy(model, [-0.5]) == pytest.approx(0.0)
        assert ising_energy(model, [+0.5]) == pytest.approx(1.0)

    def test_zero_matrix(self):
        q = QuboModel(4, {}, offset=2.0)
        model = to_ising(q)
        assert model.couplings == {}
        assert model.hz == (0.0,) * 4
        assert model.constant == 2.0

    def test_energy_identity_exhaustive(self):
        rng = np.random.default_rng(50)
        q = random_qubo(12, rng, density=0.3)
        model = to_ising(q)
        for idx in range(1 << 12):
            bits = [(idx >> (12 - m)) & 1 for m in range(1, 13)]
            want = qubo_energy(q, bits)
            got = ising_energy(model, spins_of_bits(bits))
            assert abs(got - want) < 1e-9

    def test_energy_identity_random_large(self):
        rng = np.random.default_rng(51)
        q = random_qubo(40, rng, density=0.2)
        model = to_ising(q)
        for _ in range(1000):
            bits = rng.integers(0, 2, size=40)
            want = qubo_energy(q, bits)
            got = ising_energy(model, spins_of_bits(bits))
            assert abs(got - want) < 1e-9

    def test_argmin_correspondence(self):
        rng = np.random.default_rng(52)
        n = 10
        q = random_qubo(n, rng, density=0.4)
        model = to_ising(q)
        best_q, best_i = [], []
        for idx in range(1 << n):
            bits = [(idx >> (n - m)) & 1 for m in range(1, n + 1)]
            best_q.append(qubo_energy(q, bits))
            best_i.append(ising_energy(model, spins_of_bits(bits)))
        assert np.argmin(best_q) == np.argmin(best_i)
        assert min(best_q) == pytest.approx(min(best_i), abs=1e-9)


class TestIsingEnergy:
    def test_two_spin_antiferromagnet(self):
        model = IsingModel(2, {(1, 2): 2.0}, (0.0, 0.0))
        assert ising_energy(model, [0.5, -0.5]) == -0.5
        assert ising_energy(model, [0.5, 0.5]) == 0.5

    def test_length_mismatch(self):
        model = IsingModel(2, {}, (0.0, 0.0))
        with pytest.raises(ValueError):
            ising_energy(model, [0.5])

    def test_accepts_spin_configuration(self):
        model = IsingModel(2, {(1, 2): 2.0}, (0.1, -0.2), constant=1.0)
        config = SpinConfiguration((0.5, -0.5))
        assert ising_energy(model, config) == pytest.approx(1.0 - 0.5 + 0.05 + 0.1)


class TestCharacterize:
    def test_nearest_neighbor_chain(self):
        n = 6
        model = IsingModel(n, {(m, m + 1): 1.0 for m in range(1, n)}, (0.0,) * n)
        profile = characterize(model)
        assert profile.rho[0] == 1.0
        assert all(r == 0.0 for r in profile.rho[1:])

    def test_no_couplings(self):
        model = IsingModel(4, {}, (1.0, 2.0, 3.0, 4.0))
        profile = characterize(model)
        assert all(r == 0.0 for r in profile.rho)
        assert profile.hz_mean == pytest.approx(2.5)
        assert profile.hz_std == pytest.approx(np.std([1, 2, 3, 4]))

    def test_hand_counted_four_spins(self):
        model = IsingModel(4, {(1, 2): 1.0, (1, 4): 1.0, (2, 3): 1.0}, (0.0,) * 4)
        profile = characterize(model)
        assert profile.rho == (pytest.approx(2 / 3), 0.0, pytest.approx(1.0))

    def test_counts_sum_to_coupling_count(self):
        rng = np.random.default_rng(53)
        model = to_ising(random_qubo(15, rng, density=0.3))
        profile = characterize(model)
        assert sum(profile.counts) == len(model.couplings)

    def test_needs_two_spins(self):
        with pytest.raises(ValueError):
            characterize(IsingModel(1, {}, (0.0,)))


class TestToOperatorTerms:
    def test_empty_model(self):
        model = IsingModel(3, {}, (0.0, 0.0, 0.0), constant=4.0)
        hz_terms, coupling_terms, constant = to_operator_terms(model)
        assert hz_terms == [] and coupling_terms == []
        assert constant == 4.0

    def test_two_spin_term(self):
        model = IsingModel(2, {(1, 2): 2.0}, (0.0, 0.0))
        hz_terms, coupling_terms, constant = to_operator_terms(model)
        assert len(coupling_terms) == 1 and not hz_terms
        mpo = compile_terms(coupling_terms, 2, offset=constant)
        updown = mps.from_arrays(
            [np.array([1.0, 0.0]).reshape(1, 2, 1), np.array([0.0, 1.0]).reshape(1, 2, 1)], 1)
        assert expectation(updown, mpo) == pytest.approx(-0.5, abs=1e-12)

    def test_mpo_reproduces_classical_energy(self):
        rng = np.random.default_rng(54)
        n = 8
        model = to_ising(random_qubo(n, rng, density=0.4))
        hz_terms, coupling_terms, constant = to_operator_terms(model)
        mpo = compile_terms(hz_terms + coupling_terms, n, offset=constant)
        for _ in range(20):
            bits = rng.integers(0, 2, size=n)
            arrays = []
            for b in bits:
                v = np.zeros((1, 2, 1))
                v[0, 0 if b else 1, 0] = 1.0  # x=1 is spin-up, basis index 0
                arrays.append(v)
            psi = mps.from_arrays(arrays, 1)
            want = ising_energy(model, spins_of_bits(bits))
            assert expectation(psi, mpo) == pytest.approx(want, abs=1e-10)


class TestRescale:
    def test_scales_to_unit_max(self):
        model = IsingModel(3, {(1, 2): 100.0, (1, 3): -100.0, (2, 3): 50.0},
                           (10.0, 0.0, -5.0), constant=20.0)
        scaled, factor = rescale(model)
        assert factor == 100.0
        assert scaled.couplings == {(1, 2): 1.0, (1, 3): -1.0, (2, 3): 0.5}
        assert scaled.hz == (0.1, 0.0, -0.05)
        assert scaled.constant == 0.2

    def test_already_normalized(self):
        model = IsingModel(2, {(1, 2): 1.0}, (0.0, 0.0))
        scaled, factor = rescale(model)
        assert factor == 1.0
        assert scaled.couplings == model.couplings

    def test_rejects_no_couplings(self):
        with pytest.raises(ValueError):
            rescale(IsingModel(2, {}, (1.0, 1.0)))

    def test_preserves_argmin(self):
        rng = np.random.default_rng(55)
        model = to_ising(random_qubo(8, rng, density=0.5))
        scaled, factor = rescale(model)
        energies = []
        energies_scaled = []
        for idx in range(1 << 8):
            bits = [(idx >> (8 - m)) & 1 for m in range(1, 9)]
            config = spins_of_bits(bits)
            energies.append(ising_energy(model, config))
            energies_scaled.append(ising_energy(scaled, config))
        assert np.argmin(energies) == np.argmin(energies_scaled)
        assert min(energies) == pytest.approx(factor * min(energies_scaled), rel=1e-12)


class TestQuboJson:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(56)
        q = random_qubo(6, rng)
        path = tmp_path / "model.json"
        write_qubo(q, path)
        loaded = read_qubo(path)
        assert loaded.n == q.n
        assert loaded.offset == q.offset
        assert loaded.entries == q.entries

    def test_document_shape(self):
        q = QuboModel(2, {(1, 2): 1.5}, offset=0.5)
        doc = qubo_to_json(q)
        assert doc["format"] == "qubo"
        assert doc["version"] == 1
        assert doc["entries"] == [[1, 2, 1.5]]

    def test_rejects_duplicates(self):
        doc = {"n": 2, "offset": 0, "entries": [[1, 2, 1.0], [1, 2, 2.0]]}
        with pytest.raises(ValueError, match="duplicate"):
            qubo_from_json(doc)

    def test_rejects_lower_triangle(self):
        doc = {"n": 2, "offset": 0, "entries": [[2, 1, 1.0]]}
        with pytest.raises(ValueError, match="i <= j"):
            qubo_from_json(doc)

    def test_rejects_bad_version(self):
        with pytest.raises(ValueError, match="version"):
            qubo_from_json({"format": "qubo", "version": 99, "n": 1, "entries": []})
