"""Cross-block coupling B and the two-state mixing lower bound."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .. import models
from ..basis import SpaceSplit, enumerate_sector, split_space
from ..errors import DimensionError
from ..exact import hamiltonian_matrix
from ..models import ModelSpec

COUPLING_MAX_DIM = 1 << 14
_GRAM_MAX = 2048


@dataclass(frozen=True)
class CouplingBound:
    b_value: float
    beta_per_particle: float
    block_dims: tuple[int, int]
    cond_vector: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    norm_vector: Optional[np.ndarray] = field(default=None, repr=False, compare=False)


def kinetic_cross_block(model: ModelSpec, split: Optional[SpaceSplit] = None):
    """<cond|K|norm> as a sparse M_cond x (M - M_cond) matrix."""
    if split is None:
        split = split_space(model)
    sector = models.sector_of(model)
    if sector.dimension > COUPLING_MAX_DIM:
        raise DimensionError(
            f"cross block needs M <= {COUPLING_MAX_DIM}, got {sector.dimension}", "n_sites"
        )
    states = enumerate_sector(sector)
    k = hamiltonian_matrix(model.with_g(0.0), states)
    cond = split.cond_mask(states)
    return k[np.flatnonzero(cond)][:, np.flatnonzero(~cond)].tocsr()


def _top_singular(block) -> tuple[float, np.ndarray, np.ndarray]:
    m, n = block.shape
    if min(m, n) <= _GRAM_MAX:
        # Gram matrix on the smaller side
        left = m <= n
        gram = (block @ block.T) if left else (block.T @ block)
        gram = gram.toarray() if hasattr(gram, "toarray") else np.asarray(gram)
        w, v = scipy.linalg.eigh(gram, subset_by_index=[len(gram) - 1, len(gram) - 1])
        sigma = math.sqrt(max(float(w[0]), 0.0))
        vec = v[:, 0]
        if sigma == 0:
            other = np.zeros(n if left else m)
        else:
            other = (block.T @ vec if left else block @ vec) / sigma
        return (sigma, vec, other) if left else (sigma, other, vec)
    u, s, vt = scipy.sparse.linalg.svds(block.astype(float), k=1)
    return float(s[0]), u[:, 0], vt[0]


def cross_block_coupling(model: ModelSpec, split: Optional[SpaceSplit] = None) -> CouplingBound:
    """B = min over unit u_cond, u_norm of Re <u_cond|K|u_norm>.

    The minimum is minus the largest singular value of the cross block; the
    singular vectors are the optimal components. Checks the Frobenius-type
    bound |B| <= sqrt(M_cond) * (largest row norm).
    """
    if split is None:
        split = split_space(model)
    block = kinetic_cross_block(model, split)
    m_cond, m_norm = block.shape
    if m_norm == 0 or block.nnz == 0:
        b, u, v = 0.0, np.zeros(m_cond), np.zeros(m_norm)
    else:
        sigma, u, v = _top_singular(block)
        # orient so that <u|K|v> = -sigma
        if float(u @ (block @ v)) > 0:
            v = -v
        b = -sigma
    row_norms = np.sqrt(np.asarray(block.multiply(block).sum(axis=1)).ravel()) if m_norm else np.zeros(1)
    bound = math.sqrt(m_cond) * float(row_norms.max(initial=0.0))
    if abs(b) > bound * (1 + 1e-12) + 1e-12:
        raise AssertionError(f"|B|={abs(b)} exceeds the row-norm bound {bound}")
    return CouplingBound(b, b / model.n_eff_particles, (m_cond, m_norm), u, v)


def _mixing_objective(x, eps_cond, eps_norm, beta):
    return eps_cond * x + eps_norm * (1.0 - x) + 2.0 * beta * math.sqrt(max(x * (1.0 - x), 0.0))


def mixing_lower_bound(eps_cond: float, eps_norm: float, beta: float, method: str = "closed-form") -> float:
    """inf over x in [0, 1] of eps_cond x + eps_norm (1-x) + 2 beta sqrt(x(1-x)).

    With x = cos^2(theta) the objective is the quadratic form of the 2x2
    matrix [[eps_cond, beta], [beta, eps_norm]]; for beta <= 0 its lowest
    eigenvector has non-negative components, so the infimum is the lowest
    eigenvalue. ``method="golden"`` minimizes the objective directly.
    """
    if beta > 0:
        raise ValueError(f"beta must be <= 0, got {beta}")
    if beta == 0:
        return min(eps_cond, eps_norm)
    if method == "closed-form":
        return 0.5 * (eps_cond + eps_norm) - math.hypot(0.5 * (eps_cond - eps_norm), beta)
    if method != "golden":
        raise ValueError(f"unknown method {method!r}")
    # the objective is convex on [0, 1] for beta <= 0
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = 0.0, 1.0
    c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
    fc = _mixing_objective(c, eps_cond, eps_norm, beta)
    fd = _mixing_objective(d, eps_cond, eps_norm, beta)
    while b - a > 1e-12:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = _mixing_objective(c, eps_cond, eps_norm, beta)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = _mixing_objective(d, eps_cond, eps_norm, beta)
    interior = _mixing_objective(0.5 * (a + b), eps_cond, eps_norm, beta)
    return min(interior, eps_cond, eps_norm)
