"""Matrix product states for chains of spin-1/2 sites.

Site tensors are rank-3 with labels ``(b{m-1}, s{m}, b{m})`` for site m
(1-based): left bond, physical index, right bond.  The physical index has
extent 2 with basis order (up, down), i.e. eigenvalues (+1/2, -1/2) of the
spin-z operator.  Boundary bonds have extent 1.

A state carries an orthogonality center: every tensor left of the center is
left-isometric, every tensor right of it is right-isometric.  Operations are
value-like and return new states.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .tensor import DenseTensor

__all__ = [
    "SX",
    "SZ",
    "MatrixProductState",
    "SpinConfiguration",
    "from_arrays",
    "minus_product_state",
    "random_mps",
    "canonicalize",
    "norm",
    "normalize",
    "inner",
    "expect_site",
    "site_expectations",
    "total_spin_traces",
    "readout",
    "collapse_readout",
    "rng_stream",
    "save_checkpoint",
    "load_checkpoint",
]

SX = np.array([[0.0, 0.5], [0.5, 0.0]])
SZ = np.array([[0.5, 0.0], [0.0, -0.5]])

# Purpose tags for derived PRNG streams (see rng_stream).
STREAM_STATE_INIT = 1
STREAM_NOISE = 2

CHECKPOINT_FORMAT = "spindrive-mps"
CHECKPOINT_VERSION = 1


def rng_stream(seed: int, *tags: int) -> np.random.Generator:
    """A PCG64 generator on the stream identified by (seed, *tags).

    PCG64 seeded through SeedSequence is portable and fully specified, so
    identical (seed, tags) produce identical draws on every platform.
    Distinct tag tuples give statistically independent streams.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *tags])))


def _site_labels(m: int) -> tuple[str, str, str]:
    return (f"b{m - 1}", f"s{m}", f"b{m}")


class MatrixProductState:
    """A chain of rank-3 site tensors with an orthogonality center."""

    __slots__ = ("sites", "center")

    def __init__(self, sites: list[DenseTensor], center: int):
        n = len(sites)
        if n == 0:
            raise ValueError("an MPS needs at least one site")
        if not 1 <= center <= n:
            raise ValueError(f"center {center} out of range 1..{n}")
        for m, t in enumerate(sites, start=1):
            if t.labels != _site_labels(m):
                raise ValueError(
                    f"site {m} has labels {t.labels}, expected {_site_labels(m)}"
                )
            if t.dims[1] != 2:
                raise ValueError(f"site {m} physical extent {t.dims[1]} != 2")
        if sites[0].dims[0] != 1 or sites[-1].dims[2] != 1:
            raise ValueError("boundary bonds must have extent 1")
        for m in range(n - 1):
            if sites[m].dims[2] != sites[m + 1].dims[0]:
                raise ValueError(f"bond extent mismatch between sites {m + 1} and {m + 2}")
        self.sites = list(sites)
        self.center = center

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def bond_dims(self) -> list[int]:
        """Bond extents including the trivial boundaries (length N+1)."""
        return [self.sites[0].dims[0]] + [t.dims[2] for t in self.sites]

    def max_bond(self) -> int:
        return max(self.bond_dims())

    def site_array(self, m: int) -> np.ndarray:
        return self.sites[m - 1].array

    def __repr__(self):
        return (
            f"MatrixProductState(n={self.n_sites}, center={self.center}, "
            f"max_bond={self.max_bond()})"
        )


@dataclass(frozen=True)
class SpinConfiguration:
    """A classical configuration: one value in {+1/2, -1/2} per site."""

    values: tuple[float, ...]

    def __post_init__(self):
        for v in self.values:
            if v not in (0.5, -0.5):
                raise ValueError(f"spin value {v} is not +/-1/2")

    @property
    def n(self) -> int:
        return len(self.values)

    def as_binary(self) -> tuple[int, ...]:
        """Map +1/2 -> 1 and -1/2 -> 0."""
        return tuple(1 if v > 0 else 0 for v in self.values)


def from_arrays(arrays: list[np.ndarray], center: int) -> MatrixProductState:
    """Build a state from raw (left, physical, right) site arrays."""
    sites = [DenseTensor(a, _site_labels(m)) for m, a in enumerate(arrays, start=1)]
    return MatrixProductState(sites, center)


def minus_product_state(n: int) -> MatrixProductState:
    """The normalized product state with every spin in (|up> - |down>)/sqrt(2)."""
    if n < 1:
        raise ValueError("need at least one spin")
    v = np.array([1.0, -1.0]) / np.sqrt(2.0)
    arrays = [v.reshape(1, 2, 1)] * n
    return from_arrays(arrays, 1)


def _uniform_mps(n: int, d: int, rng: np.random.Generator) -> MatrixProductState:
    if n < 1:
        raise ValueError("need at least one spin")
    if d < 1:
        raise ValueError("bond dimension must be positive")
    bonds = [min(d, 2 ** min(m, n - m)) for m in range(n + 1)]
    arrays = [rng.uniform(-1.0, 1.0, size=(bonds[m - 1], 2, bonds[m])) for m in range(1, n + 1)]
    state = from_arrays(arrays, n)
    return normalize(canonicalize(state, 1))


def random_mps(n: int, d: int, seed: int) -> MatrixProductState:
    """A seeded random MPS, canonicalized at site 1 and normalized.

    Entries are drawn uniform(-1, 1); bond extents are min(d, maximal
    Schmidt rank).  Identical seeds give bitwise-identical states.
    """
    return _uniform_mps(n, d, rng_stream(seed, STREAM_STATE_INIT))


def _signed_qr(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """QR with the R diagonal forced nonnegative, so the gauge is unique
    and re-canonicalizing an already-canonical tensor is the identity."""
    q, r = np.linalg.qr(mat)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs, r * signs[:, None]


def _push_left(arrays: list[np.ndarray], stop: int) -> None:
    """Left-QR sites 1..stop-1 in place, absorbing R factors rightward."""
    for m in range(1, stop):
        a = arrays[m - 1]
        l, p, r = a.shape
        q, rmat = _signed_qr(a.reshape(l * p, r))
        arrays[m - 1] = q.reshape(l, p, q.shape[1])
        arrays[m] = np.tensordot(rmat, arrays[m], axes=(1, 0))


def _push_right(arrays: list[np.ndarray], stop: int) -> None:
    """Right-QR sites N..stop+1 in place, absorbing R factors leftward."""
    for m in range(len(arrays), stop, -1):
        a = arrays[m - 1]
        l, p, r = a.shape
        q, rmat = _signed_qr(a.reshape(l, p * r).T)
        arrays[m - 1] = q.T.reshape(q.shape[1], p, r)
        arrays[m - 2] = np.tensordot(arrays[m - 2], rmat.T, axes=(2, 0))


def canonicalize(state: MatrixProductState, new_center: int) -> MatrixProductState:
    """Return an equivalent state with the orthogonality center at `new_center`.

    Sweeps in from both ends with exact QR factorizations, so the represented
    wavefunction is unchanged regardless of the input gauge.
    """
    n = state.n_sites
    if not 1 <= new_center <= n:
        raise ValueError(f"center {new_center} out of range 1..{n}")
    arrays = [state.site_array(m).copy() for m in range(1, n + 1)]
    _push_left(arrays, new_center)
    _push_right(arrays, new_center)
    return from_arrays(arrays, new_center)


def norm(state: MatrixProductState) -> float:
    return float(np.sqrt(max(inner(state, state), 0.0)))


def normalize(state: MatrixProductState) -> MatrixProductState:
    """Scale the center tensor so the state has unit norm."""
    nrm = norm(state)
    if nrm == 0.0 or not np.isfinite(nrm):
        raise ValueError(f"cannot normalize state with norm {nrm}")
    arrays = [state.site_array(m) for m in range(1, state.n_sites + 1)]
    arrays = list(arrays)
    arrays[state.center - 1] = arrays[state.center - 1] / nrm
    return from_arrays(arrays, state.center)


def inner(a: MatrixProductState, b: MatrixProductState) -> float:
    """<a|b> by zipper contraction over the chain."""
    if a.n_sites != b.n_sites:
        raise ValueError(f"length mismatch: {a.n_sites} vs {b.n_sites}")
    env = np.ones((1, 1))
    for m in range(1, a.n_sites + 1):
        ta = a.site_array(m)
        tb = b.site_array(m)
        env = np.tensordot(env, ta, axes=(0, 0))       # (bb, p, ra)
        env = np.tensordot(env, tb, axes=([0, 1], [0, 1]))  # (ra, rb)
    return float(env[0, 0])


def expect_site(state: MatrixProductState, op, m: int) -> float:
    """<psi| op_m |psi> for a 2x2 single-site operator."""
    if not 1 <= m <= state.n_sites:
        raise ValueError(f"site {m} out of range 1..{state.n_sites}")
    return site_expectations(state, op)[m - 1]


def site_expectations(state: MatrixProductState, op) -> list[float]:
    """All single-site expectation values <psi| op_m |psi> in one pass."""
    op = np.asarray(op, dtype=np.float64)
    if op.shape != (2, 2):
        raise ValueError(f"operator must be 2x2, got {op.shape}")
    n = state.n_sites
    arrays = [state.site_array(m) for m in range(1, n + 1)]
    # Left transfer environments without any operator insertion.
    lenvs = [np.ones((1, 1))]
    for a in arrays:
        e = np.tensordot(lenvs[-1], a, axes=(0, 0))
        e = np.tensordot(e, a, axes=([0, 1], [0, 1]))
        lenvs.append(e)
    renvs = [np.ones((1, 1))]
    for a in reversed(arrays):
        e = np.tensordot(a, renvs[-1], axes=(2, 0))
        e = np.tensordot(e, a, axes=([1, 2], [1, 2]))
        renvs.append(e)
    renvs.reverse()
    out = []
    for m in range(1, n + 1):
        a = arrays[m - 1]
        t = np.tensordot(lenvs[m - 1], a, axes=(0, 0))      # (bb, p, r)
        t = np.tensordot(t, op, axes=(1, 1))                # (bb, r, p')
        t = np.tensordot(t, a, axes=([0, 2], [0, 1]))       # (r, rb)
        out.append(float(np.tensordot(t, renvs[m], axes=([0, 1], [0, 1]))))
    return out


def total_spin_traces(
    state: MatrixProductState, n_up_ground: int | None = None
) -> tuple[float, float]:
    """Total spin-x and spin-z expectation values.

    The spin-z total is measured from the ground-state value
    (n_up_ground - N/2) when `n_up_ground` is given, else reported raw.
    """
    sx_total = float(sum(site_expectations(state, SX)))
    sz_total = float(sum(site_expectations(state, SZ)))
    if n_up_ground is not None:
        sz_total -= n_up_ground - state.n_sites / 2.0
    return sx_total, sz_total


def readout(state: MatrixProductState) -> SpinConfiguration:
    """Threshold per-site <Sz> into a classical configuration.

    Sites with <Sz_m> >= 0 read out as +1/2; exact ties break up, and values
    within rounding noise of zero are treated as ties.
    """
    sz = site_expectations(state, SZ)
    return SpinConfiguration(tuple(0.5 if v >= -1e-12 else -0.5 for v in sz))


def collapse_readout(state: MatrixProductState) -> SpinConfiguration:
    """Read a definite configuration by greedy sequential branch selection.

    Site by site, the likelier spin value is chosen (ties up) and the state
    is projected onto it before the next site is examined, so superpositions
    of several classical configurations yield one coherent branch instead of
    per-site averages.  On product states this agrees with `readout`.
    """
    st = canonicalize(state, 1)
    values = []
    left = np.ones((1,))
    for m in range(1, st.n_sites + 1):
        a = st.site_array(m)
        up = left @ a[:, 0, :]
        down = left @ a[:, 1, :]
        w_up = float(up @ up)
        w_down = float(down @ down)
        if w_up >= w_down - 1e-24:
            values.append(0.5)
            left = up
        else:
            values.append(-0.5)
            left = down
        nrm = np.linalg.norm(left)
        if nrm > 0:
            left = left / nrm
    return SpinConfiguration(tuple(values))


def save_checkpoint(state: MatrixProductState, path) -> None:
    """Write a version-tagged JSON checkpoint of the state."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "n": state.n_sites,
        "center": state.center,
        "sites": [
            {"dims": list(state.site_array(m).shape), "data": state.site_array(m).reshape(-1).tolist()}
            for m in range(1, state.n_sites + 1)
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_checkpoint(path) -> MatrixProductState:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"not an MPS checkpoint: format={payload.get('format')!r}")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('version')!r}")
    arrays = [
        np.asarray(site["data"], dtype=np.float64).reshape(site["dims"])
        for site in payload["sites"]
    ]
    return from_arrays(arrays, payload["center"])
