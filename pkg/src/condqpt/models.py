"""Hamiltonians H = K + gV of every model family as matrix-element oracles.

All families are written in the eigenbasis of their potential V, so V is
diagonal and K connects a configuration to a handful of neighbours. Sites
are 0-based here; docstrings count from 1.

The vectorized helpers take uint64 arrays of configurations; ``matrix_row``
is the single-configuration view of the same data.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Iterator, NamedTuple, Optional

import numpy as np

from . import quadratic
from .basis import SectorSpec, as_bits, enumerate_sector, to_string
from .errors import ConfigError, SectorError

ONE = np.uint64(1)


class Family(str, enum.Enum):
    GROVER = "grover"
    GROVER_MODIFIED = "grover-modified"
    FERMION_IMPURITY = "fermion-impurity"
    FERMION_IMPURITY_EXTENSIVE = "fermion-impurity-extensive"
    FERMION_ATTRACTIVE = "fermion-attractive"
    BOSON_ATTRACTIVE = "hardcore-boson-attractive"
    ISING = "ising-transverse"
    COUNTER_EXAMPLE = "counter-example"

    def __str__(self):
        return self.value


SPIN_FAMILIES = frozenset(
    {Family.GROVER, Family.GROVER_MODIFIED, Family.ISING, Family.COUNTER_EXAMPLE}
)
FERMION_FAMILIES = frozenset(
    {Family.FERMION_IMPURITY, Family.FERMION_IMPURITY_EXTENSIVE, Family.FERMION_ATTRACTIVE}
)
ATTRACTIVE_FAMILIES = frozenset({Family.FERMION_ATTRACTIVE, Family.BOSON_ATTRACTIVE})


def is_spin_family(family) -> bool:
    return Family(family) in SPIN_FAMILIES


def has_impurities(family) -> bool:
    return Family(family) == Family.FERMION_IMPURITY


@dataclass(frozen=True)
class ModelSpec:
    """A model family with its size, filling, boundary and coupling.

    ``boundary`` defaults to PBC for the Ising chain and OBC otherwise.
    """

    family: Family
    n_sites: int
    n_particles: Optional[int] = None
    n_impurities: Optional[int] = None
    boundary: Optional[str] = None
    g: float = 0.0

    def __post_init__(self):
        try:
            family = Family(self.family)
        except ValueError:
            raise ConfigError(f"unknown family {self.family!r}", "model.family") from None
        object.__setattr__(self, "family", family)
        boundary = self.boundary
        if boundary is None:
            boundary = "pbc" if family == Family.ISING else "obc"
        boundary = str(boundary).lower()
        if boundary not in ("obc", "pbc"):
            raise ConfigError(f"boundary must be obc or pbc, got {self.boundary!r}", "model.boundary")
        object.__setattr__(self, "boundary", boundary)
        n = self.n_sites
        # bit-encoded solvers cap N at 64 through SectorSpec; the quadratic
        # and symmetric solvers do not
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise ConfigError(f"N must be a positive integer, got {n!r}", "model.N")
        object.__setattr__(self, "n_sites", int(n))
        g = float(self.g)
        if not math.isfinite(g):
            raise ConfigError("g must be finite", "model.g")
        object.__setattr__(self, "g", g)
        if family in SPIN_FAMILIES:
            if self.n_particles not in (None, n):
                raise ConfigError("spin families have N_p = N; leave Np unset", "model.Np")
            object.__setattr__(self, "n_particles", None)
        else:
            if self.n_particles is None:
                raise ConfigError(f"{family} needs a particle number", "model.Np")
            if not 0 <= self.n_particles <= n:
                raise ConfigError(f"N_p={self.n_particles} outside [0, N={n}]", "model.Np")
            if boundary == "pbc" and n < 3:
                raise ConfigError("periodic hopping chains need N >= 3", "model.N")
        if family == Family.FERMION_IMPURITY:
            n_imp = self.n_impurities
            if n_imp is None:
                raise ConfigError("fermion-impurity needs N_imp", "model.Nimp")
            if not 0 <= n_imp <= self.n_particles:
                raise ConfigError(
                    f"need 0 <= N_imp <= N_p, got N_imp={n_imp}, N_p={self.n_particles}", "model.Nimp"
                )
        elif self.n_impurities is not None:
            raise ConfigError(f"{family} takes no impurity count", "model.Nimp")
        if family in ATTRACTIVE_FAMILIES and g < 0:
            raise ConfigError("the attractive families require g >= 0", "model.g")

    @property
    def n_eff_particles(self) -> int:
        """N_p, with N_p = N for spin families."""
        return self.n_sites if self.n_particles is None else self.n_particles

    @property
    def statistics(self) -> str:
        if self.family in SPIN_FAMILIES:
            return "spin"
        if self.family == Family.BOSON_ATTRACTIVE:
            return "hardcore-boson"
        return "fermion"

    @property
    def periodic(self) -> bool:
        return self.boundary == "pbc"

    def with_g(self, g: float) -> "ModelSpec":
        return replace(self, g=g)

    def label(self) -> str:
        parts = [str(self.family), f"N{self.n_sites}"]
        if self.n_particles is not None:
            parts.append(f"Np{self.n_particles}")
        if self.n_impurities is not None:
            parts.append(f"Nimp{self.n_impurities}")
        parts.append(self.boundary)
        return "_".join(parts)


def sector_of(model: ModelSpec) -> SectorSpec:
    return SectorSpec(model.n_sites, model.n_particles, model.statistics)


def sector_dimension(model: ModelSpec) -> int:
    """M without building the bit-encoded sector, so any N is accepted."""
    if model.n_particles is None:
        return 1 << model.n_sites
    return math.comb(model.n_sites, model.n_particles)


# -- bond geometry ---------------------------------------------------------

def bond_mask(model: ModelSpec) -> int:
    """Bit b set when bond (b, b+1 mod N) exists."""
    n = model.n_sites
    return (1 << n) - 1 if model.periodic else (1 << (n - 1)) - 1


def partner(states: np.ndarray, n_sites: int) -> np.ndarray:
    """Bit b of the result is bit (b+1 mod N) of the input."""
    states = np.asarray(states, dtype=np.uint64)
    return (states >> ONE) | ((states & ONE) << np.uint64(n_sites - 1))


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(a, dtype=np.uint64)).astype(np.int64)


# -- potential -------------------------------------------------------------

def potential_part_array(model: ModelSpec, states) -> np.ndarray:
    """Integer potential V(c), before multiplication by g."""
    s = np.asarray(states, dtype=np.uint64)
    n = model.n_sites
    fam = model.family
    if fam == Family.GROVER:
        return np.where(s == 0, -n, 0).astype(np.int64)
    if fam in (Family.GROVER_MODIFIED, Family.COUNTER_EXAMPLE):
        return np.where((s & ONE) != 0, -n, 0).astype(np.int64)
    if fam == Family.ISING:
        bm = np.uint64(bond_mask(model))
        n_bonds = bin(bond_mask(model)).count("1")
        anti = _popcount((s ^ partner(s, n)) & bm)
        return -(n_bonds - 2 * anti)
    if fam == Family.FERMION_IMPURITY:
        imp = np.uint64((1 << model.n_impurities) - 1)
        return -_popcount(s & imp)
    if fam == Family.FERMION_IMPURITY_EXTENSIVE:
        return np.where((s & ONE) != 0, -model.n_particles, 0).astype(np.int64)
    if fam in ATTRACTIVE_FAMILIES:
        bm = np.uint64(bond_mask(model))
        return -_popcount(s & partner(s, n) & bm)
    raise AssertionError(fam)


def potential_part(model: ModelSpec, c) -> int:
    return int(potential_part_array(model, np.array([as_bits(c)], dtype=np.uint64))[0])


def potential_value(model: ModelSpec, c) -> float:
    """Diagonal of gV on ``c``."""
    return model.g * potential_part(model, c)


def kinetic_diagonal_array(model: ModelSpec, states) -> np.ndarray:
    s = np.asarray(states, dtype=np.uint64)
    if model.family == Family.COUNTER_EXAMPLE:
        # -N |up_x><up_x| = -N/2 (1 + sigma^x) on spin 1
        return np.full(s.shape, -model.n_sites / 2.0)
    return np.zeros(s.shape)


def diagonal_array(model: ModelSpec, states) -> np.ndarray:
    return kinetic_diagonal_array(model, states) + model.g * potential_part_array(model, states)


# -- hopping ----------------------------------------------------------------

class MoveBatch(NamedTuple):
    valid: np.ndarray
    targets: np.ndarray
    amplitudes: np.ndarray


def iter_moves(model: ModelSpec, states) -> Iterator[MoveBatch]:
    """Yield one batch per elementary move (site flip or bond swap).

    Within a batch, ``targets[valid]`` are the neighbours reached from
    ``states[valid]`` and ``amplitudes[valid]`` the matrix elements
    <target|K|state>.
    """
    s = np.asarray(states, dtype=np.uint64)
    n = model.n_sites
    fam = model.family
    if fam == Family.COUNTER_EXAMPLE:
        yield MoveBatch(np.ones(s.shape, bool), s ^ ONE, np.full(s.shape, -n / 2.0))
        return
    if fam in SPIN_FAMILIES:
        for i in range(n):
            yield MoveBatch(np.ones(s.shape, bool), s ^ (ONE << np.uint64(i)), np.full(s.shape, -1.0))
        return
    fermion = fam in FERMION_FAMILIES
    n_bonds = n if model.periodic else n - 1
    for b in range(n_bonds):
        j = (b + 1) % n
        pair = np.uint64((1 << b) | (1 << j))
        occ = s & pair
        valid = (occ != 0) & (occ != pair)
        amps = np.full(s.shape, -1.0)
        lo, hi = min(b, j), max(b, j)
        between = ((1 << hi) - 1) ^ ((1 << (lo + 1)) - 1)
        if fermion and between:
            # Jordan-Wigner string over the sites strictly between the two ends
            parity = _popcount(s & np.uint64(between)) & 1
            amps = np.where(parity == 1, 1.0, -1.0)
        yield MoveBatch(valid, s ^ pair, amps)


@dataclass(frozen=True)
class MatrixRow:
    diagonal: float
    neighbors: tuple

    def as_dict(self) -> dict:
        return dict(self.neighbors)


def matrix_row(model: ModelSpec, c) -> MatrixRow:
    """Diagonal element and off-diagonal neighbours of one configuration."""
    sector = sector_of(model)
    bits = sector.check(c)
    arr = np.array([bits], dtype=np.uint64)
    diag = float(diagonal_array(model, arr)[0])
    acc: dict[int, float] = {}
    for mv in iter_moves(model, arr):
        if mv.valid[0]:
            t = int(mv.targets[0])
            acc[t] = acc.get(t, 0.0) + float(mv.amplitudes[0])
    neighbors = tuple(sorted((t, a) for t, a in acc.items() if a != 0.0))
    return MatrixRow(diag, neighbors)


def format_row(model: ModelSpec, row: MatrixRow) -> str:
    n = model.n_sites
    nb = ", ".join(f"{to_string(t, n)}:{a:+g}" for t, a in row.neighbors)
    return f"D={row.diagonal:+g} {{{nb}}}"


# -- sign structure ------------------------------------------------------------

@dataclass(frozen=True)
class StoquasticVerdict:
    stoquastic: bool
    witness: Optional[tuple] = None  # (from, to, amplitude)

    def __bool__(self):
        return self.stoquastic


def _sign_problem_by_rule(model: ModelSpec) -> bool:
    n_p = model.n_particles
    return (
        model.family in FERMION_FAMILIES
        and model.periodic
        and n_p is not None
        and 0 < n_p < model.n_sites
        and n_p % 2 == 0
    )


def stoquastic_check(model: ModelSpec, enumerate_limit: int = 1 << 20) -> StoquasticVerdict:
    """Is every off-diagonal element of H non-positive?

    Enumerates the sector when it is small enough; otherwise applies the
    family rule (fermions on a ring with an even particle number pick up a
    positive wrap-around amplitude).
    """
    sector = sector_of(model)
    if sector.dimension <= enumerate_limit:
        states = enumerate_sector(sector)
        for mv in iter_moves(model, states):
            bad = mv.valid & (mv.amplitudes > 0)
            if bad.any():
                k = int(np.flatnonzero(bad)[0])
                return StoquasticVerdict(False, (int(states[k]), int(mv.targets[k]), float(mv.amplitudes[k])))
        return StoquasticVerdict(True)
    if _sign_problem_by_rule(model):
        n, n_p = model.n_sites, model.n_particles
        c = (1 << n_p) - 1  # particles on sites 1..N_p; site N empty
        m = c ^ 1 ^ (1 << (n - 1))
        return StoquasticVerdict(False, (c, m, 1.0))
    return StoquasticVerdict(True)


# -- closed forms -------------------------------------------------------------

def closed_form_split(model: ModelSpec):
    """(M_cond, V_min) from the family formula, or None when not tabulated."""
    n, n_p = model.n_sites, model.n_particles
    fam = model.family
    if model.g < 0:
        if fam == Family.FERMION_IMPURITY_EXTENSIVE and 0 < n_p < n:
            return math.comb(n - 1, n_p), 0
        return None
    if fam == Family.GROVER:
        return 1, -n
    if fam in (Family.GROVER_MODIFIED, Family.COUNTER_EXAMPLE):
        return 1 << (n - 1), -n
    if fam == Family.ISING:
        return 2, -bin(bond_mask(model)).count("1")
    if fam == Family.FERMION_IMPURITY:
        k = model.n_impurities
        return math.comb(n - k, n_p - k), -k
    if fam == Family.FERMION_IMPURITY_EXTENSIVE:
        if n_p == 0:
            return 1, 0
        return math.comb(n - 1, n_p - 1), -n_p
    if fam in ATTRACTIVE_FAMILIES:
        if n_p == 0:
            return 1, 0
        if n_p == n:
            return 1, -bin(bond_mask(model)).count("1")
        if model.periodic:
            return n, -(n_p - 1)
        # closest-packed blocks: N - N_p + 1 placements on an open chain
        return n - n_p + 1, -(n_p - 1)
    raise AssertionError(fam)


def closed_form_e_cond(model: ModelSpec) -> Optional[float]:
    """Ground energy restricted to F_cond, when a formula exists.

    Returns None when the family has no formula at this size or sign of g,
    or when F_cond is the whole space.
    """
    n, n_p, g = model.n_sites, model.n_particles, model.g
    fam = model.family
    split = closed_form_split(model)
    if split is None or split[0] == sector_dimension(model):
        return None
    if fam == Family.GROVER:
        return -g * n
    if fam == Family.GROVER_MODIFIED:
        return -(n - 1) - g * n
    if fam == Family.COUNTER_EXAMPLE:
        return -n / 2.0 - g * n
    if fam == Family.ISING:
        return g * split[1]
    if fam == Family.FERMION_IMPURITY:
        return n_p * quadratic.e_cond_impurity(n, n_p, model.n_impurities, g)
    if fam == Family.FERMION_IMPURITY_EXTENSIVE:
        e_cond, _ = quadratic.modified_impurity_energies(n, n_p, g)
        return n_p * e_cond
    if fam in ATTRACTIVE_FAMILIES:
        return g * split[1]
    raise AssertionError(fam)


def kinetic_ground_energy(model: ModelSpec) -> float:
    """E^(0): ground energy of K alone (the g = 0 problem)."""
    n, n_p = model.n_sites, model.n_particles
    fam = model.family
    if fam in SPIN_FAMILIES:
        return -float(n)
    if not model.periodic:
        return quadratic.free_chain_energy(n, n_p)
    corner = -1.0
    if fam == Family.BOSON_ATTRACTIVE and n_p % 2 == 0:
        # hard-core bosons on a ring map to fermions with a twisted boundary
        corner = 1.0
    levels = quadratic.chain_levels(n, 0, 0.0, "pbc", corner=corner)
    return float(math.fsum(levels[:n_p]))
