"""Free-fermion solvers and the thermodynamic Ising energy.

The impurity chains are quadratic, so their N_p-particle ground state fills
the lowest N_p eigenvalues of an N x N single-particle matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.linalg


def impurity_matrix(n_sites: int, n_imp: int, g: float, boundary: str = "obc", corner: float = -1.0) -> np.ndarray:
    """Single-particle matrix: -1 between neighbours, -g on the first n_imp sites."""
    if n_sites < 1 or not 0 <= n_imp <= n_sites:
        raise ValueError(f"need N >= 1 and 0 <= N_imp <= N, got N={n_sites}, N_imp={n_imp}")
    a = np.zeros((n_sites, n_sites))
    idx = np.arange(n_sites - 1)
    a[idx, idx + 1] = a[idx + 1, idx] = -1.0
    a[np.arange(n_imp), np.arange(n_imp)] = -g
    if boundary == "pbc" and n_sites > 2:
        a[0, -1] = a[-1, 0] = corner
    return a


def chain_levels(n_sites: int, n_imp: int, g: float, boundary: str = "obc", corner: float = -1.0) -> np.ndarray:
    """Sorted single-particle energies.

    Open chains use the symmetric tridiagonal solver; rings carry corner
    entries and go through the dense one.
    """
    if boundary == "obc" or n_sites <= 2:
        if n_sites == 1:
            return np.array([-g if n_imp else 0.0])
        diag = np.zeros(n_sites)
        diag[:n_imp] = -g
        return scipy.linalg.eigh_tridiagonal(diag, -np.ones(n_sites - 1), eigvals_only=True)
    return np.linalg.eigvalsh(impurity_matrix(n_sites, n_imp, g, boundary, corner))


@dataclass(frozen=True)
class SingleParticleSpectrum:
    matrix_a: np.ndarray
    levels: np.ndarray

    @property
    def n_sites(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class FillingResult:
    energy: float
    gap: float


def impurity_spectrum(n_sites: int, n_imp: int, g: float, boundary: str = "obc") -> SingleParticleSpectrum:
    a = impurity_matrix(n_sites, n_imp, g, boundary)
    return SingleParticleSpectrum(a, chain_levels(n_sites, n_imp, g, boundary))


def fill(spectrum: SingleParticleSpectrum, n_particles: int) -> FillingResult:
    """Pauli filling of the lowest ``n_particles`` levels."""
    levels = spectrum.levels
    if not 0 <= n_particles <= len(levels):
        raise ValueError(f"cannot place {n_particles} fermions on {len(levels)} levels")
    energy = math.fsum(levels[:n_particles])
    gap = float("nan")
    if 0 < n_particles < len(levels):
        gap = float(levels[n_particles] - levels[n_particles - 1])
    return FillingResult(energy, gap)


def many_body_gap_quadratic(spectrum: SingleParticleSpectrum, n_particles: int) -> float:
    """Particle-hole gap e_{N_p+1} - e_{N_p} at fixed particle number."""
    n = len(spectrum.levels)
    if not 1 <= n_particles < n:
        raise ValueError(f"particle-hole gap needs 1 <= N_p < N, got N_p={n_particles}, N={n}")
    return float(spectrum.levels[n_particles] - spectrum.levels[n_particles - 1])


def free_chain_energy(n_sites: int, n_particles: int) -> float:
    """E^(0)(N, N_p): N_p free fermions on an open chain of N sites."""
    if not 0 <= n_particles <= n_sites:
        raise ValueError(f"need 0 <= N_p <= N, got N_p={n_particles}, N={n_sites}")
    return math.fsum(-2.0 * math.cos(math.pi * l / (n_sites + 1)) for l in range(1, n_particles + 1))


def e_cond_impurity(n_sites: int, n_particles: int, n_imp: int, g: float) -> float:
    """E_cond / N_p with the impurity sites filled and the rest a free chain."""
    if not 0 <= n_imp <= n_particles:
        raise ValueError(f"need 0 <= N_imp <= N_p, got N_imp={n_imp}, N_p={n_particles}")
    if n_particles == 0:
        raise ValueError("energy per particle undefined for N_p = 0")
    rest = free_chain_energy(n_sites - n_imp, n_particles - n_imp)
    return -g * n_imp / n_particles + rest / n_particles


def modified_impurity_energies(n_sites: int, n_particles: int, g: float) -> tuple[float, float]:
    """(E_cond/N_p, E_norm/N_p) for the chain with field -g N_p on site 1.

    For g >= 0 the condensed states have site 1 filled; for g < 0 the roles
    of the two subspaces swap.
    """
    if not 1 <= n_particles <= n_sites - 1:
        raise ValueError(f"need 1 <= N_p <= N - 1, got N_p={n_particles}, N={n_sites}")
    filled = -g + free_chain_energy(n_sites - 1, n_particles - 1) / n_particles
    empty = free_chain_energy(n_sites - 1, n_particles) / n_particles
    if g >= 0:
        return filled, empty
    return empty, filled


def many_body_ground(n_sites: int, n_particles: int, n_imp: int, g: float, boundary: str = "obc") -> FillingResult:
    return fill(impurity_spectrum(n_sites, n_imp, g, boundary), n_particles)


def _pfeuty_integrand(q, g):
    return math.sqrt(1.0 + 2.0 * g * math.cos(q) + g * g)


def pfeuty_epsilon(g: float) -> float:
    """Ground energy per site of the infinite transverse-field Ising chain.

    The integrand is even in q, so only [0, pi] is integrated; at g = 1 its
    kink sits on the endpoint q = pi.
    """
    if not math.isfinite(g) or g < 0:
        raise ValueError(f"need finite g >= 0, got {g}")
    val, err = scipy.integrate.quad(
        _pfeuty_integrand, 0.0, math.pi, args=(g,), epsabs=1e-13, epsrel=1e-13, limit=200
    )
    if err > 1e-10:
        raise ArithmeticError(f"quadrature error estimate {err:.2e} above 1e-10 at g={g}")
    return -val / math.pi
