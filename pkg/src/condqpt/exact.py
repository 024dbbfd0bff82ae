"""Exact diagonalization on the full space and on the cond/norm subspaces."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg
import scipy.sparse

from . import models
from .basis import SpaceSplit, enumerate_sector, split_space
from .errors import CapabilityError, ConvergenceError, EmptySubspaceError
from .models import Family, ModelSpec

DENSE_MAX = 4096
AUTO_DENSE_MAX = 2048
LANCZOS_MAX = 1 << 24
MAX_LANCZOS_ITER = 500
LANCZOS_TOL = 1e-12

MODES = ("full", "cond", "norm")


@dataclass(frozen=True)
class SubspaceSelector:
    mode: str = "full"
    split: Optional[SpaceSplit] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"selector mode must be one of {MODES}, got {self.mode!r}")
        if self.mode != "full" and self.split is None:
            raise ValueError(f"{self.mode} selector needs a SpaceSplit")

    def mask(self, states: np.ndarray) -> np.ndarray:
        if self.mode == "full":
            return np.ones(len(states), dtype=bool)
        cond = self.split.cond_mask(states)
        return cond if self.mode == "cond" else ~cond


@dataclass(frozen=True)
class SpectrumResult:
    e0: float
    e1: Optional[float] = None
    dim: int = 0
    solver: str = "dense"
    ground_vector: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def gap(self) -> Optional[float]:
        if self.e1 is None:
            return None
        return max(self.e1 - self.e0, 0.0)


def selector(model: ModelSpec, mode: str = "full", split: Optional[SpaceSplit] = None) -> SubspaceSelector:
    if mode != "full" and split is None:
        split = split_space(model)
    return SubspaceSelector(mode, split)


def subspace_states(model: ModelSpec, sel: SubspaceSelector) -> np.ndarray:
    states = enumerate_sector(models.sector_of(model), LANCZOS_MAX)
    if sel.mode == "full":
        return states
    return states[sel.mask(states)]


def hamiltonian_matrix(model: ModelSpec, states: np.ndarray) -> scipy.sparse.csr_matrix:
    """P H P on the span of ``states`` (sorted); couplings leaving it are dropped."""
    states = np.asarray(states, dtype=np.uint64)
    m = len(states)
    rows = [np.arange(m)]
    cols = [np.arange(m)]
    vals = [models.diagonal_array(model, states)]
    for mv in models.iter_moves(model, states):
        src = np.flatnonzero(mv.valid)
        if not src.size:
            continue
        tgt = mv.targets[src]
        pos = np.minimum(np.searchsorted(states, tgt), m - 1)
        keep = states[pos] == tgt
        rows.append(pos[keep])
        cols.append(src[keep])
        vals.append(mv.amplitudes[src][keep])
    h = scipy.sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(m, m)
    )
    return h.tocsr()


def _tridiag_eigs(alpha, beta):
    if len(alpha) == 1:
        return np.array(alpha), np.ones((1, 1))
    return scipy.linalg.eigh_tridiagonal(np.array(alpha), np.array(beta))


def lanczos_lowest(
    matvec: Callable[[np.ndarray], np.ndarray],
    dim: int,
    v0: Optional[np.ndarray] = None,
    deflate: Optional[np.ndarray] = None,
    tol: float = LANCZOS_TOL,
    max_iter: int = MAX_LANCZOS_ITER,
    krylov_dim: Optional[int] = None,
):
    """Lowest eigenpair by Lanczos with full reorthogonalization.

    The Krylov basis is rebuilt from the current Ritz vector when it reaches
    ``krylov_dim``. With ``deflate`` (a unit vector) the iteration runs on the
    orthogonal complement of that vector. Returns ``(theta, vector, n_matvec)``.
    """
    if krylov_dim is None:
        mem_cap = max(20, int(1.5e9 // (8 * max(dim, 1))))
        krylov_dim = min(dim, 150, mem_cap)
    if v0 is None:
        v0 = np.random.default_rng(20240611).random(dim) + 0.5

    def project(x):
        if deflate is not None:
            x = x - deflate * (deflate @ x)
        return x

    v = project(np.asarray(v0, dtype=float))
    nv = np.linalg.norm(v)
    if nv == 0:
        raise ConvergenceError("Lanczos start vector vanishes after deflation")
    v /= nv
    n_matvec = 0
    basis = np.empty((krylov_dim + 1, dim))
    while True:
        basis[0] = v
        alpha, beta = [], []
        for j in range(krylov_dim):
            w = project(matvec(basis[j]))
            n_matvec += 1
            a = float(basis[j] @ w)
            alpha.append(a)
            for _ in range(2):
                w -= basis[: j + 1].T @ (basis[: j + 1] @ w)
            w = project(w)
            b = float(np.linalg.norm(w))
            theta, s = _tridiag_eigs(alpha, beta)
            residual = abs(b * s[-1, 0])
            exhausted = b <= 1e-13 * max(1.0, abs(theta[0])) or j + 1 >= dim - (deflate is not None)
            if residual < tol * max(1.0, abs(theta[0])) or exhausted:
                vec = basis[: j + 1].T @ s[:, 0]
                return float(theta[0]), vec / np.linalg.norm(vec), n_matvec
            if n_matvec >= max_iter:
                raise ConvergenceError(
                    f"Lanczos did not converge in {max_iter} iterations (residual {residual:.2e})"
                )
            beta.append(b)
            basis[j + 1] = w / b
        vec = basis[:krylov_dim].T @ s[:, 0]
        v = project(vec)
        v /= np.linalg.norm(v)


def solve_matrix(h, want_excited: bool = False, solver: str = "auto") -> SpectrumResult:
    dim = h.shape[0]
    if dim == 0:
        raise EmptySubspaceError("selected subspace is empty")
    if solver == "auto":
        solver = "dense" if dim <= AUTO_DENSE_MAX else "lanczos"
    if solver == "dense":
        if dim > DENSE_MAX:
            raise CapabilityError(f"dense solver limited to dimension {DENSE_MAX}, got {dim}")
        dense = h.toarray() if scipy.sparse.issparse(h) else np.asarray(h)
        hi = min(1, dim - 1) if want_excited else 0
        w, v = scipy.linalg.eigh(dense, subset_by_index=[0, hi])
        e1 = float(w[1]) if want_excited and dim > 1 else None
        return SpectrumResult(float(w[0]), e1, dim, "dense", v[:, 0])
    if solver != "lanczos":
        raise ValueError(f"unknown solver {solver!r}")
    if dim > LANCZOS_MAX:
        raise CapabilityError(f"Lanczos limited to dimension {LANCZOS_MAX}, got {dim}")
    matvec = h.dot
    e0, vec, _ = lanczos_lowest(matvec, dim)
    e1 = None
    if want_excited and dim > 1:
        e1, _, _ = lanczos_lowest(matvec, dim, deflate=vec)
    return SpectrumResult(e0, e1, dim, "lanczos", vec)


def ground_state(
    model: ModelSpec,
    sel: SubspaceSelector | str = "full",
    want_excited: bool = False,
    solver: str = "auto",
) -> SpectrumResult:
    """Lowest (and optionally second) eigenvalue of P H P on the selected subspace."""
    if isinstance(sel, str):
        sel = selector(model, sel)
    states = subspace_states(model, sel)
    if len(states) == 0:
        raise EmptySubspaceError(f"{sel.mode} subspace of {model.label()} is empty")
    return solve_matrix(hamiltonian_matrix(model, states), want_excited, solver)


def grover_symmetric_ground(n_sites: int, g: float, mode: str = "full") -> SpectrumResult:
    """Grover energies from the permutation-symmetric (N+1)-state block.

    Basis state k holds k up spins. States outside the symmetric block never
    see the potential, so they contribute the bare levels -(N - 2j) with
    multiplicity C(N, j) - C(N, j-1).
    """
    n = n_sites
    if n < 1:
        raise ValueError("N must be positive")
    if mode == "cond":
        return SpectrumResult(-g * n, None, 1, "symmetric-reduced")
    k = np.arange(1, n + 1)
    off = -np.sqrt(k * (n - k + 1.0))
    diag = np.zeros(n + 1)
    diag[0] = -g * n
    if mode == "norm":
        diag, off = diag[1:], off[1:]
        dim = (1 << n) - 1 if n < 64 else None
    elif mode == "full":
        dim = 1 << n if n < 64 else None
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if len(diag) == 1:
        block = diag.copy()
    else:
        block = scipy.linalg.eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, 1))
    candidates = list(block)
    for j in (1, 2):
        mult = math.comb(n, j) - math.comb(n, j - 1)
        if mult > 0:
            candidates.extend([-(n - 2.0 * j)] * min(mult, 2))
    candidates.sort()
    e1 = candidates[1] if len(candidates) > 1 else None
    return SpectrumResult(float(candidates[0]), e1, dim or 0, "symmetric-reduced")


@dataclass(frozen=True)
class GapReport:
    g: float
    e: float
    e_cond: float
    e_norm: Optional[float]
    e1: Optional[float]
    solvers: dict

    @property
    def delta(self) -> Optional[float]:
        return None if self.e1 is None else self.e1 - self.e

    @property
    def delta0(self) -> Optional[float]:
        return None if self.e_norm is None else abs(self.e_cond - self.e_norm)

    @property
    def delta1(self) -> float:
        return abs(self.e_cond - self.e)


def gap_report(model: ModelSpec, split: Optional[SpaceSplit] = None, g: Optional[float] = None,
               want_excited: bool = True, method: str = "ed") -> GapReport:
    """Delta, Delta0 and Delta1 at one coupling.

    ``method="symmetric"`` uses the reduced Grover block for all three
    energies.
    """
    if g is not None:
        model = model.with_g(g)
    if split is None:
        split = split_space(model)
    if split.m_cond == split.m_total:
        raise EmptySubspaceError("F_norm is empty: the potential is constant on the sector")
    if method == "symmetric":
        if model.family != Family.GROVER:
            raise CapabilityError("symmetric reduction applies to the Grover family only")
        full = grover_symmetric_ground(model.n_sites, model.g, "full")
        norm = grover_symmetric_ground(model.n_sites, model.g, "norm")
        return GapReport(model.g, full.e0, -model.g * model.n_sites, norm.e0,
                         full.e1 if want_excited else None,
                         {"E": full.solver, "E_cond": "closed-form", "E_norm": norm.solver})
    full = ground_state(model, SubspaceSelector("full", split), want_excited)
    e_cond = models.closed_form_e_cond(model)
    cond_solver = "closed-form"
    if e_cond is None:
        cond = ground_state(model, SubspaceSelector("cond", split))
        e_cond, cond_solver = cond.e0, cond.solver
    norm = ground_state(model, SubspaceSelector("norm", split))
    return GapReport(model.g, full.e0, e_cond, norm.e0, full.e1,
                     {"E": full.solver, "E_cond": cond_solver, "E_norm": norm.solver})
