"""Matrix product operators compiled from weighted spin-term lists.

A term is a coefficient times a product of one or two single-site spin
operators (Sx or Sz).  Term lists are compiled into an MPO by a
finite-state-machine construction: a "start" channel carries the identity
until a term begins, one pending channel per open left endpoint carries a
placed first factor, and a "done" channel carries the identity after a term
has completed.  The raw bond dimension grows with the coupling range, so the
tensor train is compressed bond-by-bond with truncated SVDs while it is
built (left to right) and once more right to left; with the default cutoff
this is exact to machine precision.

Constant offsets are carried as a scalar next to the tensor train, never
materialized as an identity channel.

Site tensors are rank-4 with labels ``(w{m-1}, out{m}, in{m}, w{m})``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mps import SX, SZ, MatrixProductState, inner
from .tensor import DenseTensor, truncation_rank

__all__ = ["OperatorTerm", "MatrixProductOperator", "compile_terms", "mix", "expectation"]

_OPS = {"Sx": SX, "Sz": SZ}

DEFAULT_COMPRESS_CUTOFF = 1e-12


@dataclass(frozen=True)
class OperatorTerm:
    """coefficient * product of Sx/Sz factors on one or two distinct sites."""

    coefficient: float
    factors: tuple[tuple[int, str], ...]

    def __post_init__(self):
        if not np.isfinite(self.coefficient):
            raise ValueError(f"non-finite coefficient {self.coefficient}")
        if len(self.factors) not in (1, 2):
            raise ValueError(f"terms must have 1 or 2 factors, got {len(self.factors)}")
        sites = [s for s, _ in self.factors]
        if sorted(set(sites)) != sites:
            raise ValueError(f"factor sites must be distinct and increasing: {sites}")
        for site, kind in self.factors:
            if site < 1:
                raise ValueError(f"site index {site} must be >= 1")
            if kind not in _OPS:
                raise ValueError(f"unknown operator kind {kind!r}")

    def scaled(self, factor: float) -> "OperatorTerm":
        return OperatorTerm(self.coefficient * factor, self.factors)


def _mpo_labels(m: int) -> tuple[str, str, str, str]:
    return (f"w{m - 1}", f"out{m}", f"in{m}", f"w{m}")


class MatrixProductOperator:
    """A chain of rank-4 tensors plus a scalar constant."""

    __slots__ = ("sites", "offset")

    def __init__(self, sites: list[DenseTensor], offset: float = 0.0):
        if not sites:
            raise ValueError("an MPO needs at least one site")
        if not np.isfinite(offset):
            raise ValueError(f"non-finite offset {offset}")
        for m, t in enumerate(sites, start=1):
            if t.labels != _mpo_labels(m):
                raise ValueError(f"site {m} has labels {t.labels}, expected {_mpo_labels(m)}")
            if t.dims[1] != 2 or t.dims[2] != 2:
                raise ValueError(f"site {m} physical extents {t.dims[1:3]} != (2, 2)")
        if sites[0].dims[0] != 1 or sites[-1].dims[3] != 1:
            raise ValueError("boundary bonds must have extent 1")
        for m in range(len(sites) - 1):
            if sites[m].dims[3] != sites[m + 1].dims[0]:
                raise ValueError(f"bond extent mismatch between sites {m + 1} and {m + 2}")
        self.sites = list(sites)
        self.offset = float(offset)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def bond_dims(self) -> list[int]:
        return [self.sites[0].dims[0]] + [t.dims[3] for t in self.sites]

    def max_bond(self) -> int:
        return max(self.bond_dims())

    def site_array(self, m: int) -> np.ndarray:
        return self.sites[m - 1].array

    def __repr__(self):
        return (
            f"MatrixProductOperator(n={self.n_sites}, max_bond={self.max_bond()}, "
            f"offset={self.offset})"
        )


def compile_terms(
    terms,
    n: int,
    offset: float = 0.0,
    compress_cutoff: float = DEFAULT_COMPRESS_CUTOFF,
) -> MatrixProductOperator:
    """Compile a term list over `n` sites into a compressed MPO."""
    if n < 1:
        raise ValueError("need at least one site")
    singles: dict[int, np.ndarray] = {}
    starts: dict[int, dict] = {}          # site -> {channel key: first-factor op}
    completions: dict[int, dict] = {}     # site -> {channel key: accumulated c * op}
    last_completion: dict[tuple, int] = {}
    for term in terms:
        for site, _ in term.factors:
            if site > n:
                raise ValueError(f"term site {site} out of range 1..{n}")
        if term.coefficient == 0.0:
            continue
        if len(term.factors) == 1:
            (site, kind), = term.factors
            singles.setdefault(site, np.zeros((2, 2)))
            singles[site] = singles[site] + term.coefficient * _OPS[kind]
        else:
            (m, k1), (p, k2) = term.factors
            key = (m, k1)
            starts.setdefault(m, {})[key] = _OPS[k1]
            comp = completions.setdefault(p, {})
            comp[key] = comp.get(key, np.zeros((2, 2))) + term.coefficient * _OPS[k2]
            last_completion[key] = max(last_completion.get(key, 0), p)

    # Pending channels alive on each bond b (key starts at m, dies at its
    # last completion): alive iff m <= b < last_completion.
    pending: list[list] = [[] for _ in range(n + 1)]
    for key, last in last_completion.items():
        for b in range(key[0], last):
            pending[b].append(key)
    for b in range(n + 1):
        pending[b].sort()

    def channels(b: int) -> list:
        if b == 0:
            return ["start"]
        if b == n:
            return ["done"]
        return ["start", "done"] + pending[b]

    eye = np.eye(2)
    arrays = []
    for b in range(1, n + 1):
        rows = channels(b - 1)
        cols = channels(b)
        row_index = {c: i for i, c in enumerate(rows)}
        col_index = {c: i for i, c in enumerate(cols)}
        w = np.zeros((len(rows), 2, 2, len(cols)))
        if "start" in row_index and "start" in col_index:
            w[row_index["start"], :, :, col_index["start"]] = eye
        if "start" in row_index and b in singles:
            w[row_index["start"], :, :, col_index["done"]] += singles[b]
        if "start" in row_index:
            for key, op in starts.get(b, {}).items():
                if key in col_index:
                    w[row_index["start"], :, :, col_index[key]] = op
        for key in pending[b - 1]:
            if key in col_index:
                w[row_index[key], :, :, col_index[key]] = eye
            comp = completions.get(b, {})
            if key in comp:
                w[row_index[key], :, :, col_index["done"]] += comp[key]
        if "done" in row_index:
            w[row_index["done"], :, :, col_index["done"]] = eye
        arrays.append(w)

    arrays = _compress(arrays, compress_cutoff)
    sites = [DenseTensor(a, _mpo_labels(m)) for m, a in enumerate(arrays, start=1)]
    return MatrixProductOperator(sites, offset)


def _compress(arrays: list[np.ndarray], cutoff: float) -> list[np.ndarray]:
    """Two-pass SVD compression of an MPO tensor train (exact up to cutoff)."""
    n = len(arrays)
    # Left-to-right: stream a carry matrix through the raw tensors so the
    # full raw train is never held in compressed+raw mixed form.
    carry = np.ones((1, 1))
    out = []
    for b, w in enumerate(arrays, start=1):
        t = np.tensordot(carry, w, axes=(1, 0))
        if b == n:
            out.append(t)
            break
        k = t.shape[0]
        wr = t.shape[3]
        mat = t.reshape(k * 4, wr)
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        keep, _ = truncation_rank(s, len(s), cutoff)
        out.append(u[:, :keep].reshape(k, 2, 2, keep))
        carry = s[:keep, None] * vh[:keep, :]
    # Right-to-left rounding pass down to minimal ranks.
    for b in range(n, 1, -1):
        w = out[b - 1]
        wl = w.shape[0]
        mat = w.reshape(wl, -1)
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        keep, _ = truncation_rank(s, len(s), cutoff)
        out[b - 1] = vh[:keep, :].reshape((keep,) + w.shape[1:])
        carry = u[:, :keep] * s[None, :keep]
        out[b - 2] = np.tensordot(out[b - 2], carry, axes=(3, 0))
    return out


def mix(
    hx_terms,
    hz_terms,
    a: float,
    b: float,
    offset: float,
    n: int,
    compress_cutoff: float = DEFAULT_COMPRESS_CUTOFF,
) -> MatrixProductOperator:
    """Compile a*(hx terms) + b*(hz terms) with the constant scaled by b.

    The constant belongs to the problem part, so it enters as b*offset.
    """
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError(f"control parameters must be finite, got a={a}, b={b}")
    terms = [t.scaled(a) for t in hx_terms if a * t.coefficient != 0.0]
    terms += [t.scaled(b) for t in hz_terms if b * t.coefficient != 0.0]
    return compile_terms(terms, n, offset=b * offset, compress_cutoff=compress_cutoff)


def expectation(state: MatrixProductState, mpo: MatrixProductOperator) -> float:
    """<psi| MPO |psi> + offset * <psi|psi>, by zipper contraction."""
    if state.n_sites != mpo.n_sites:
        raise ValueError(f"length mismatch: state {state.n_sites}, mpo {mpo.n_sites}")
    env = np.ones((1, 1, 1))  # (bra bond, mpo bond, ket bond)
    for m in range(1, state.n_sites + 1):
        a = state.site_array(m)
        w = mpo.site_array(m)
        t = np.tensordot(env, a, axes=(2, 0))            # (bb, wb, p_in, rk)
        t = np.tensordot(t, w, axes=([1, 2], [0, 2]))    # (bb, rk, p_out, wr)
        t = np.tensordot(a, t, axes=([0, 1], [0, 2]))    # (rb, rk, wr)
        env = t.transpose(0, 2, 1)
    return float(env[0, 0, 0]) + mpo.offset * inner(state, state)
