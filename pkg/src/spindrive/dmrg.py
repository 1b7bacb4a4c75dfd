"""Two-site DMRG: environment caches, Lanczos local solves, truncated sweeps.

A sweep walks the chain left-to-right and back, at each bond minimizing the
energy of the two-site tensor with a restarted Lanczos iteration on the
implicitly applied effective operator, then splitting the result with a
truncated SVD.  Left/right environments are updated incrementally, never
rebuilt from scratch per bond.

Two-site updates are used (not single-site) so the bond dimension can shrink
adaptively; on classical (pure Sz) operators the converged state collapses
to a product state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import mps as mps_mod
from .mpo import MatrixProductOperator
from .mps import MatrixProductState
from .tensor import DenseTensor, truncation_rank

__all__ = ["SweepParams", "SweepOutcome", "DmrgError", "local_eigensolve", "sweep", "run"]

# Lanczos restart budgets: a bond solve inside a sweep is refined again on
# the next pass, so it gets a shallow budget; the standalone eigensolve is
# expected to converge on its own.
_SWEEP_LANCZOS_CYCLES = 3
_SOLVE_LANCZOS_CYCLES = 25
_BREAKDOWN_TOL = 1e-13


class DmrgError(RuntimeError):
    """An unrecoverable failure inside a sweep, tagged with the bond position."""

    def __init__(self, message: str, bond: int | None = None):
        super().__init__(message)
        self.bond = bond


@dataclass(frozen=True)
class SweepParams:
    """Knobs for the sweep loop."""

    max_bond: int
    cutoff: float = 1e-10
    krylov_dim: int = 4
    eig_tol: float = 1e-14
    nsweeps: int = 5

    def __post_init__(self):
        if self.max_bond < 1:
            raise ValueError(f"max_bond must be >= 1, got {self.max_bond}")
        if self.cutoff < 0:
            raise ValueError(f"cutoff must be >= 0, got {self.cutoff}")
        if self.krylov_dim < 2:
            raise ValueError(f"krylov_dim must be >= 2, got {self.krylov_dim}")
        if self.nsweeps < 1:
            raise ValueError(f"nsweeps must be >= 1, got {self.nsweeps}")


@dataclass(frozen=True)
class SweepOutcome:
    state: MatrixProductState
    energy: float
    energy_history: list[float] = field(default_factory=list)
    max_bond_reached: int = 1
    converged: bool = False


def local_eigensolve(effective_op, guess: DenseTensor, krylov_dim: int, eig_tol: float):
    """Approximate smallest eigenpair of an implicit symmetric operator.

    `effective_op` is a callable mapping an ndarray of the guess's shape to
    another of the same shape.  Returns (eigenvalue, normalized eigenvector)
    with the eigenvector wrapped like the guess.  Restarted Lanczos from the
    guess; the Ritz value never rises above the guess's Rayleigh quotient.
    """
    shape = guess.dims
    matvec = lambda flat: np.asarray(effective_op(flat.reshape(shape))).ravel()
    lam, vec = _lanczos_min(matvec, guess.array.ravel(), krylov_dim, eig_tol,
                            max_cycles=_SOLVE_LANCZOS_CYCLES)
    return lam, DenseTensor(vec.reshape(shape), guess.labels)


def _lanczos_min(matvec, v0: np.ndarray, krylov_dim: int, tol: float,
                 max_cycles: int = _SWEEP_LANCZOS_CYCLES) -> tuple[float, np.ndarray]:
    nrm = np.linalg.norm(v0)
    if nrm == 0.0:
        raise ValueError("Lanczos guess is zero")
    if not np.isfinite(nrm):
        raise ValueError("Lanczos guess is not finite")
    v = v0 / nrm
    lam_prev = None
    lam = None
    for _ in range(max_cycles):
        basis = [v]
        alphas: list[float] = []
        betas: list[float] = []
        breakdown = False
        for j in range(krylov_dim):
            w = matvec(basis[j])
            if not np.all(np.isfinite(w)):
                raise ValueError("non-finite values from operator application")
            a = float(basis[j] @ w)
            alphas.append(a)
            if j == krylov_dim - 1:
                break
            w = w - a * basis[j]
            if j > 0:
                w = w - betas[j - 1] * basis[j - 1]
            for q in basis:  # full reorthogonalization; krylov_dim is small
                w = w - (q @ w) * q
            b = float(np.linalg.norm(w))
            if b <= _BREAKDOWN_TOL * max(1.0, abs(a)):
                breakdown = True
                break
            betas.append(b)
            basis.append(w / b)
        k = len(alphas)
        tri = np.diag(alphas)
        for j in range(k - 1):
            tri[j, j + 1] = tri[j + 1, j] = betas[j]
        evals, evecs = np.linalg.eigh(tri)
        lam = float(evals[0])
        v = sum(float(evecs[j, 0]) * basis[j] for j in range(k))
        v = v / np.linalg.norm(v)
        if breakdown and k == 1:
            break  # the guess was an exact eigenvector
        if lam_prev is not None and abs(lam - lam_prev) <= tol * max(1.0, abs(lam)):
            break
        if breakdown:
            break  # invariant subspace: the Ritz pair is exact
        lam_prev = lam
    return lam, v


# ---------------------------------------------------------------------------
# environment contractions (bra and ket are the same real tensors)

def _add_site_left(env: np.ndarray, a: np.ndarray, w: np.ndarray) -> np.ndarray:
    t = np.tensordot(env, a, axes=(2, 0))           # (bb, wb, p_in, rk)
    t = np.tensordot(t, w, axes=([1, 2], [0, 2]))   # (bb, rk, p_out, wr)
    t = np.tensordot(a, t, axes=([0, 1], [0, 2]))   # (rb, rk, wr)
    return t.transpose(0, 2, 1)


def _add_site_right(env: np.ndarray, a: np.ndarray, w: np.ndarray) -> np.ndarray:
    t = np.tensordot(a, env, axes=(2, 2))           # (lk, p_in, bb, wb)
    t = np.tensordot(w, t, axes=([3, 2], [3, 1]))   # (wl, p_out, lk, bb)
    t = np.tensordot(a, t, axes=([1, 2], [1, 3]))   # (lb, wl, lk)
    return t


def _apply_heff(lenv, w1, w2, renv, theta):
    t = np.tensordot(lenv, theta, axes=(2, 0))          # (a, w, s_in, t_in, b')
    t = np.tensordot(t, w1, axes=([1, 2], [0, 2]))      # (a, t_in, b', s_out, w2)
    t = np.tensordot(t, w2, axes=([4, 1], [0, 2]))      # (a, b', s_out, t_out, w')
    t = np.tensordot(t, renv, axes=([4, 1], [1, 2]))    # (a, s_out, t_out, b)
    return t


def _bond_matvec(lenv, w1, w2, renv, shape):
    """A fast flat-vector application of the two-site effective operator.

    Pre-arranges the environments and fuses the two MPO tensors so each
    application is three GEMMs plus two transposes; equivalent to
    _apply_heff up to floating-point ordering.
    """
    dl, _, _, dr = shape
    wl = w1.shape[0]
    wr = w2.shape[3]
    lm = lenv.reshape(dl * wl, dl)
    w12 = np.tensordot(w1, w2, axes=(3, 0))             # (w, so, si, to, ti, w')
    w12m = np.ascontiguousarray(
        w12.transpose(0, 2, 4, 1, 3, 5)).reshape(wl * 4, 4 * wr)
    rm = np.ascontiguousarray(renv.transpose(2, 1, 0)).reshape(dr * wr, dr)

    def matvec(flat: np.ndarray) -> np.ndarray:
        t = (lm @ flat.reshape(dl, 4 * dr)).reshape(dl, wl, 2, 2, dr)
        t = np.ascontiguousarray(t.transpose(0, 4, 1, 2, 3)).reshape(dl * dr, wl * 4)
        t = (t @ w12m).reshape(dl, dr, 2, 2, wr)
        t = np.ascontiguousarray(t.transpose(0, 2, 3, 1, 4)).reshape(dl * 4, dr * wr)
        return (t @ rm).ravel()

    return matvec


class _Workspace:
    """Mutable sweep state: site arrays plus cached environments."""

    def __init__(self, state: MatrixProductState, mpo: MatrixProductOperator,
                 params: SweepParams):
        if state.n_sites != mpo.n_sites:
            raise DmrgError(
                f"length mismatch: state {state.n_sites}, mpo {mpo.n_sites}")
        n = state.n_sites
        st = mps_mod.canonicalize(state, 1)
        st = mps_mod.normalize(st)
        self.n = n
        self.arrays = [st.site_array(m).copy() for m in range(1, n + 1)]
        self.ws = [mpo.site_array(m) for m in range(1, n + 1)]
        self.offset = mpo.offset
        self.params = params
        self.max_bond_seen = max(a.shape[2] for a in self.arrays)
        # lenv[i] holds sites 1..i contracted; renv[i] holds sites i..N.
        self.lenv: list = [None] * (n + 1)
        self.renv: list = [None] * (n + 2)
        self.lenv[0] = np.ones((1, 1, 1))
        self.renv[n + 1] = np.ones((1, 1, 1))
        for i in range(n, 1, -1):
            self.renv[i] = _add_site_right(self.renv[i + 1], self.arrays[i - 1],
                                           self.ws[i - 1])

    def _solve_bond(self, i: int, to_right: bool) -> None:
        p = self.params
        a1 = self.arrays[i - 1]
        a2 = self.arrays[i]
        theta = np.tensordot(a1, a2, axes=(2, 0))
        shape = theta.shape
        matvec = _bond_matvec(self.lenv[i - 1], self.ws[i - 1], self.ws[i],
                              self.renv[i + 2], shape)
        try:
            _, vec = _lanczos_min(matvec, theta.ravel(), p.krylov_dim, p.eig_tol)
        except ValueError as exc:
            raise DmrgError(f"local eigensolve failed at bond {i}: {exc}", bond=i) from exc
        theta = vec.reshape(shape)
        dl = shape[0]
        dr = shape[3]
        u, s, vh = np.linalg.svd(theta.reshape(dl * 2, 2 * dr), full_matrices=False)
        keep, _ = truncation_rank(s, p.max_bond, p.cutoff)
        u = u[:, :keep]
        vh = vh[:keep, :]
        s = s[:keep]
        s = s / np.linalg.norm(s)  # keep the state normalized after truncation
        self.max_bond_seen = max(self.max_bond_seen, keep)
        if to_right:
            self.arrays[i - 1] = u.reshape(dl, 2, keep)
            self.arrays[i] = (s[:, None] * vh).reshape(keep, 2, dr)
            self.lenv[i] = _add_site_left(self.lenv[i - 1], self.arrays[i - 1],
                                          self.ws[i - 1])
        else:
            self.arrays[i - 1] = (u * s[None, :]).reshape(dl, 2, keep)
            self.arrays[i] = vh.reshape(keep, 2, dr)
            self.renv[i + 1] = _add_site_right(self.renv[i + 2], self.arrays[i],
                                               self.ws[i])

    def sweep_once(self) -> float:
        """One full left-right-left pass; returns the energy afterwards."""
        n = self.n
        if n == 1:
            # Degenerate chain: diagonalize the single 2x2 block exactly.
            w = self.ws[0][0, :, :, 0]
            evals, evecs = np.linalg.eigh(w)
            self.arrays[0] = evecs[:, 0].reshape(1, 2, 1)
            return float(evals[0]) + self.offset
        for i in range(1, n):
            self._solve_bond(i, to_right=True)
        for i in range(n - 1, 0, -1):
            self._solve_bond(i, to_right=False)
        e = _add_site_right(self.renv[2], self.arrays[0], self.ws[0])
        return float(e[0, 0, 0]) + self.offset

    def state(self) -> MatrixProductState:
        sites = [DenseTensor(a, (f"b{m - 1}", f"s{m}", f"b{m}"))
                 for m, a in enumerate(self.arrays, start=1)]
        return MatrixProductState(sites, 1)


def sweep(state: MatrixProductState, mpo: MatrixProductOperator,
          params: SweepParams) -> SweepOutcome:
    """Run exactly one back-and-forth sweep."""
    ws = _Workspace(state, mpo, params)
    energy = ws.sweep_once()
    return SweepOutcome(ws.state(), energy, [energy], ws.max_bond_seen, False)


def run(state: MatrixProductState, mpo: MatrixProductOperator, params: SweepParams,
        early_exit: bool = True) -> SweepOutcome:
    """Run params.nsweeps sweeps, optionally stopping early on energy stall."""
    ws = _Workspace(state, mpo, params)
    history: list[float] = []
    converged = False
    for _ in range(params.nsweeps):
        history.append(ws.sweep_once())
        if len(history) >= 2:
            delta = abs(history[-1] - history[-2])
            if delta < params.eig_tol * max(1.0, abs(history[-1])):
                converged = True
                if early_exit:
                    break
    return SweepOutcome(ws.state(), history[-1], history, ws.max_bond_seen, converged)
