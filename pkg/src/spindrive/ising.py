"""QUBO models, the exact QUBO-to-spin-glass transformation, and model stats.

A QUBO stores the symmetric matrix sparsely as upper-triangle-plus-diagonal
entries; its objective for a binary vector x is

    offset + sum_i Q_ii x_i + 2 * sum_{i<j} Q_ij x_i x_j

(the factor 2 because the symmetric double sum visits each off-diagonal pair
twice).  The spin image replaces x_m by S_m + 1/2 with S_m in {+1/2, -1/2},
which produces pair couplings, an inhomogeneous longitudinal field, and a
constant shift; the transformation is exact configuration by configuration.

QUBO JSON interchange format (version 1):

    {"format": "qubo", "version": 1, "n": int, "offset": float,
     "entries": [[i, j, value], ...]}

with 1-based indices, i <= j, at most one entry per (i, j).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .mps import SpinConfiguration
from .mpo import OperatorTerm

__all__ = [
    "QuboModel",
    "IsingModel",
    "GlassProfile",
    "qubo_energy",
    "to_ising",
    "ising_energy",
    "characterize",
    "to_operator_terms",
    "rescale",
    "qubo_to_json",
    "qubo_from_json",
    "read_qubo",
    "write_qubo",
]

QUBO_FORMAT = "qubo"
QUBO_VERSION = 1


class QuboModel:
    """Symmetric QUBO matrix in sparse upper-triangular storage."""

    __slots__ = ("n", "entries", "offset")

    def __init__(self, n: int, entries, offset: float = 0.0):
        if n < 0:
            raise ValueError(f"variable count must be >= 0, got {n}")
        if not np.isfinite(offset):
            raise ValueError(f"non-finite offset {offset}")
        folded: dict[tuple[int, int], float] = {}
        items = entries.items() if isinstance(entries, dict) else entries
        for item in items:
            if isinstance(entries, dict):
                (i, j), v = item
            else:
                i, j, v = item
            if not (1 <= i <= n and 1 <= j <= n):
                raise ValueError(f"entry index ({i}, {j}) out of range 1..{n}")
            if not np.isfinite(v):
                raise ValueError(f"non-finite entry at ({i}, {j})")
            key = (i, j) if i <= j else (j, i)
            folded[key] = folded.get(key, 0.0) + float(v)
        self.n = n
        self.entries = {k: v for k, v in sorted(folded.items()) if v != 0.0}
        self.offset = float(offset)

    def __repr__(self):
        return f"QuboModel(n={self.n}, nnz={len(self.entries)}, offset={self.offset})"


def qubo_energy(q: QuboModel, x) -> float:
    """Objective offset + x^T Q x for a binary vector x."""
    x = list(x)
    if len(x) != q.n:
        raise ValueError(f"length mismatch: {len(x)} vs n={q.n}")
    total = q.offset
    for (i, j), v in q.entries.items():
        if i == j:
            total += v * x[i - 1]
        else:
            total += 2.0 * v * x[i - 1] * x[j - 1]
    return float(total)


@dataclass(frozen=True)
class IsingModel:
    """Pair couplings, longitudinal fields, and a constant shift.

    `couplings[(m, n)]` with m < n holds the accumulated coupling on the
    unordered pair, i.e. both ordered matrix entries summed.  The classical
    energy of a configuration s in {+1/2, -1/2}^n is

        constant + sum_{m<n} couplings[m,n] s_m s_n + sum_m hz[m] s_m

    `hx_base` optionally fixes a per-site transverse-field baseline for the
    driver; it plays no role in the classical energy.
    """

    n: int
    couplings: dict[tuple[int, int], float]
    hz: tuple[float, ...]
    constant: float = 0.0
    hx_base: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("model needs at least one spin")
        if len(self.hz) != self.n:
            raise ValueError(f"hz has {len(self.hz)} entries for {self.n} spins")
        for (m, p), v in self.couplings.items():
            if not (1 <= m < p <= self.n):
                raise ValueError(f"coupling key ({m}, {p}) must satisfy 1 <= m < n <= {self.n}")
            if not np.isfinite(v):
                raise ValueError(f"non-finite coupling at ({m}, {p})")
        if not np.isfinite(self.constant) or not all(np.isfinite(h) for h in self.hz):
            raise ValueError("non-finite field or constant")
        if self.hx_base is not None and len(self.hx_base) != self.n:
            raise ValueError(f"hx_base has {len(self.hx_base)} entries for {self.n} spins")


@dataclass(frozen=True)
class GlassProfile:
    """Field statistics and the coupling filling fraction by distance."""

    hz_mean: float
    hz_std: float
    rho: tuple[float, ...]
    counts: tuple[int, ...]


def to_ising(q: QuboModel) -> IsingModel:
    """Exact spin image of a QUBO: x_m = S_m + 1/2.

    The pair coupling on (m, n) is twice the symmetric matrix entry, the
    field is the full row sum (diagonal included), and the constant absorbs
    the quarter-trace plus quarter grand sum on top of the QUBO offset.
    """
    if q.n < 1:
        raise ValueError("cannot map a QUBO with no variables")
    n = q.n
    hz = np.zeros(n)
    couplings: dict[tuple[int, int], float] = {}
    trace = 0.0
    grand = 0.0
    for (i, j), v in q.entries.items():
        if i == j:
            trace += v
            grand += v
            hz[i - 1] += v
        else:
            grand += 2.0 * v
            hz[i - 1] += v
            hz[j - 1] += v
            couplings[(i, j)] = couplings.get((i, j), 0.0) + 2.0 * v
    constant = q.offset + 0.25 * trace + 0.25 * grand
    couplings = {k: v for k, v in sorted(couplings.items()) if v != 0.0}
    return IsingModel(n, couplings, tuple(hz.tolist()), constant)


def ising_energy(model: IsingModel, config) -> float:
    """Classical energy of a configuration with entries in {+1/2, -1/2}."""
    values = config.values if isinstance(config, SpinConfiguration) else tuple(config)
    if len(values) != model.n:
        raise ValueError(f"length mismatch: {len(values)} vs n={model.n}")
    total = model.constant
    for m, h in enumerate(model.hz):
        total += h * values[m]
    for (m, p), v in model.couplings.items():
        total += v * values[m - 1] * values[p - 1]
    return float(total)


def characterize(model: IsingModel) -> GlassProfile:
    """Field mean/std and the fraction of coupled pairs at each distance."""
    if model.n < 2:
        raise ValueError("characterize needs at least two spins")
    hz = np.asarray(model.hz)
    counts = [0] * (model.n - 1)
    for (m, p) in model.couplings:
        counts[p - m - 1] += 1
    rho = tuple(counts[d - 1] / (model.n - d) for d in range(1, model.n))
    return GlassProfile(float(hz.mean()), float(hz.std()), rho, tuple(counts))


def to_operator_terms(model: IsingModel):
    """Spin-z operator terms of the model: (field terms, coupling terms, constant)."""
    hz_terms = [
        OperatorTerm(h, ((m, "Sz"),))
        for m, h in enumerate(model.hz, start=1)
        if h != 0.0
    ]
    coupling_terms = [
        OperatorTerm(v, ((m, "Sz"), (p, "Sz")))
        for (m, p), v in sorted(model.couplings.items())
        if v != 0.0
    ]
    return hz_terms, coupling_terms, model.constant


def rescale(model: IsingModel) -> tuple[IsingModel, float]:
    """Divide the whole model by its largest absolute coupling.

    Positive uniform scaling preserves the energy ordering, so the minimizing
    configurations are unchanged; the factor is returned so energies can be
    mapped back.
    """
    if not model.couplings:
        raise ValueError("cannot rescale a model with no couplings")
    factor = max(abs(v) for v in model.couplings.values())
    if factor == 0.0:
        raise ValueError("cannot rescale a model whose couplings are all zero")
    scaled = IsingModel(
        model.n,
        {k: v / factor for k, v in model.couplings.items()},
        tuple(h / factor for h in model.hz),
        model.constant / factor,
        model.hx_base,
    )
    return scaled, factor


def qubo_to_json(q: QuboModel) -> dict:
    return {
        "format": QUBO_FORMAT,
        "version": QUBO_VERSION,
        "n": q.n,
        "offset": q.offset,
        "entries": [[i, j, v] for (i, j), v in sorted(q.entries.items())],
    }


def qubo_from_json(payload: dict) -> QuboModel:
    if payload.get("format", QUBO_FORMAT) != QUBO_FORMAT:
        raise ValueError(f"not a QUBO document: format={payload.get('format')!r}")
    if payload.get("version", QUBO_VERSION) != QUBO_VERSION:
        raise ValueError(f"unsupported QUBO version {payload.get('version')!r}")
    try:
        n = int(payload["n"])
        offset = float(payload.get("offset", 0.0))
        raw = payload["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed QUBO document: {exc}") from exc
    seen = set()
    entries = []
    for item in raw:
        i, j, v = item
        if not (isinstance(i, int) and isinstance(j, int)):
            raise ValueError(f"entry indices must be integers: {item}")
        if i > j:
            raise ValueError(f"entries must have i <= j: {item}")
        if (i, j) in seen:
            raise ValueError(f"duplicate entry for ({i}, {j})")
        seen.add((i, j))
        entries.append((i, j, float(v)))
    return QuboModel(n, entries, offset)


def write_qubo(q: QuboModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(qubo_to_json(q), fh)


def read_qubo(path) -> QuboModel:
    with open(path) as fh:
        return qubo_from_json(json.load(fh))
