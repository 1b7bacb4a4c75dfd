"""Independent brute-force and dense-diagonalization oracles.

Everything here is deliberately naive and separate from the tensor-network
code paths: configurations are enumerated exhaustively, operators are
materialized as explicit 2^n x 2^n matrices, and MPS amplitudes are expanded
by per-configuration matrix chain products.  The test suites check the fast
paths against these.

Basis convention shared with the rest of the package: configuration index c
encodes site m (1-based) in bit (n - m), bit value 0 meaning spin up (+1/2).
Site 1 is the most significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ising import IsingModel
from .mps import SX, SZ, MatrixProductState, SpinConfiguration

__all__ = [
    "OracleResult",
    "brute_force_ground",
    "dense_matrix",
    "dense_ground_energy",
    "statevector",
    "config_index",
    "config_from_index",
]

BRUTE_FORCE_CAP = 24
DENSE_CAP = 12
_CHUNK_BITS = 16

_OPS = {"Sx": SX, "Sz": SZ}


@dataclass(frozen=True)
class OracleResult:
    best_energy: float
    best_configs: tuple[SpinConfiguration, ...]
    evaluated_count: int


def config_index(config: SpinConfiguration) -> int:
    """Index of a configuration under the shared basis convention."""
    idx = 0
    for v in config.values:
        idx = (idx << 1) | (0 if v > 0 else 1)
    return idx


def config_from_index(idx: int, n: int) -> SpinConfiguration:
    values = tuple(0.5 if not (idx >> (n - m)) & 1 else -0.5 for m in range(1, n + 1))
    return SpinConfiguration(values)


def brute_force_ground(model: IsingModel) -> OracleResult:
    """Exhaustive ground search over all 2^n configurations.

    Enumeration is vectorized in fixed-size chunks; energies of integer and
    half-integer models are exact in float64, so ties are compared exactly.
    Minimizers are returned in increasing configuration-index order.
    """
    n = model.n
    if n > BRUTE_FORCE_CAP:
        raise ValueError(f"brute force capped at n <= {BRUTE_FORCE_CAP}, got {n}")
    total = 1 << n
    chunk = min(total, 1 << _CHUNK_BITS)
    pairs = sorted(model.couplings.items())
    hz = np.asarray(model.hz)
    best_energy = np.inf
    best_indices: list[int] = []
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        # spins[:, m-1] = +-1/2 per site
        bits = (idx[:, None] >> (n - np.arange(1, n + 1))[None, :]) & 1
        spins = 0.5 - bits.astype(np.float64)
        energies = np.full(len(idx), model.constant)
        energies += spins @ hz
        for (m, p), v in pairs:
            energies += v * spins[:, m - 1] * spins[:, p - 1]
        lo = float(energies.min())
        if lo < best_energy:
            best_energy = lo
            best_indices = []
        if lo <= best_energy:
            best_indices.extend(int(i) for i in idx[energies == best_energy])
    configs = tuple(config_from_index(i, n) for i in sorted(best_indices))
    return OracleResult(best_energy, configs, total)


def dense_matrix(terms, n: int) -> np.ndarray:
    """Materialize a term list as an explicit 2^n x 2^n real symmetric matrix."""
    if n > DENSE_CAP:
        raise ValueError(f"dense operators capped at n <= {DENSE_CAP}, got {n}")
    dim = 1 << n
    h = np.zeros((dim, dim))
    cols = np.arange(dim)
    for term in terms:
        amp = np.full(dim, term.coefficient)
        flip = 0
        for site, kind in term.factors:
            if site > n:
                raise ValueError(f"term site {site} out of range 1..{n}")
            bit = (cols >> (n - site)) & 1
            if kind == "Sz":
                amp = amp * (0.5 - bit)
            elif kind == "Sx":
                amp = amp * 0.5
                flip |= 1 << (n - site)
            else:
                raise ValueError(f"unknown operator kind {kind!r}")
        h[cols ^ flip, cols] += amp
    return h


def dense_ground_energy(hx_terms, hz_terms, a: float, b: float, offset: float, n: int) -> float:
    """Smallest eigenvalue of a*Hx + b*Hz plus b*offset, by dense eigensolve."""
    terms = [t.scaled(a) for t in hx_terms] + [t.scaled(b) for t in hz_terms]
    h = dense_matrix([t for t in terms if t.coefficient != 0.0], n)
    return float(np.linalg.eigvalsh(h)[0]) + b * offset


def statevector(state: MatrixProductState, cap: int = 16) -> np.ndarray:
    """Dense amplitude vector of an MPS by naive matrix chain products."""
    n = state.n_sites
    if n > cap:
        raise ValueError(f"statevector expansion capped at n <= {cap}, got {n}")
    arrays = [state.site_array(m) for m in range(1, n + 1)]
    out = np.empty(1 << n)
    for idx in range(1 << n):
        vec = np.ones((1,))
        for m in range(1, n + 1):
            bit = (idx >> (n - m)) & 1
            vec = vec @ arrays[m - 1][:, bit, :]
        out[idx] = vec[0]
    return out
