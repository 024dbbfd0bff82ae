"""Configuration basis: enumeration, ranking and the cond/norm split.

Configurations are bit patterns stored in 64-bit unsigned integers. Bit ``i``
(0-based) is the occupation of site ``i + 1``, or spin ``s_{i+1} = +1`` when
set. String forms list site 1 first, so ``"0110"`` has sites 2 and 3 set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionError, SectorError

MAX_SITES = 64
ENUMERATION_LIMIT = 1 << 24

STATISTICS = ("spin", "fermion", "hardcore-boson")


@dataclass(frozen=True)
class Configuration:
    bits: int
    width: int

    def __post_init__(self):
        if not 1 <= self.width <= MAX_SITES:
            raise SectorError(f"width must be in [1, {MAX_SITES}], got {self.width}")
        if self.bits < 0 or self.bits >> self.width:
            raise SectorError(f"bits {self.bits:#x} exceed width {self.width}")

    @classmethod
    def parse(cls, text: str) -> "Configuration":
        """Build from a site string such as ``"0110"`` (site 1 first)."""
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise SectorError(f"not a site string: {text!r}")
        bits = sum(1 << i for i, ch in enumerate(text) if ch == "1")
        return cls(bits, len(text))

    def __str__(self):
        return to_string(self.bits, self.width)

    def __int__(self):
        return self.bits

    @property
    def popcount(self) -> int:
        return self.bits.bit_count()


def to_string(bits: int, width: int) -> str:
    return "".join("1" if (int(bits) >> i) & 1 else "0" for i in range(width))


def as_bits(c) -> int:
    if isinstance(c, Configuration):
        return c.bits
    if isinstance(c, str):
        return Configuration.parse(c).bits
    return int(c)


@lru_cache(maxsize=None)
def binomial_table(n_max: int = MAX_SITES) -> np.ndarray:
    """``table[n, k] = C(n, k)`` as uint64; every entry up to n = 64 fits."""
    table = np.zeros((n_max + 1, n_max + 2), dtype=np.uint64)
    for n in range(n_max + 1):
        for k in range(n + 1):
            table[n, k] = math.comb(n, k)
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class SectorSpec:
    n_sites: int
    n_particles: Optional[int] = None
    statistics: str = "spin"

    def __post_init__(self):
        if self.statistics not in STATISTICS:
            raise SectorError(f"unknown statistics {self.statistics!r}")
        if not 1 <= self.n_sites <= MAX_SITES:
            raise SectorError(f"n_sites must be in [1, {MAX_SITES}], got {self.n_sites}")
        if self.statistics == "spin":
            if self.n_particles is not None:
                raise SectorError("spin sectors carry no particle number")
        else:
            if self.n_particles is None:
                raise SectorError(f"{self.statistics} sector needs n_particles")
            if not 0 <= self.n_particles <= self.n_sites:
                raise SectorError(
                    f"n_particles={self.n_particles} outside [0, n_sites={self.n_sites}]"
                )

    @property
    def is_spin(self) -> bool:
        return self.statistics == "spin"

    @property
    def dimension(self) -> int:
        if self.is_spin:
            return 1 << self.n_sites
        return math.comb(self.n_sites, self.n_particles)

    @property
    def full_mask(self) -> int:
        return (1 << self.n_sites) - 1

    def contains(self, c) -> bool:
        bits = as_bits(c)
        if bits < 0 or bits >> self.n_sites:
            return False
        return self.is_spin or bits.bit_count() == self.n_particles

    def check(self, c) -> int:
        bits = as_bits(c)
        if not self.contains(bits):
            raise SectorError(
                f"configuration {to_string(bits, max(self.n_sites, bits.bit_length()))} "
                f"is outside sector N={self.n_sites}, Np={self.n_particles}"
            )
        return bits

    def rank(self, c) -> int:
        bits = self.check(c)
        if self.is_spin:
            return bits
        # combinatorial number system: sum over set positions p_j of C(p_j, j)
        r, j, rest = 0, 0, bits
        while rest:
            low = rest & -rest
            j += 1
            r += math.comb(low.bit_length() - 1, j)
            rest ^= low
        return r

    def unrank(self, index: int) -> int:
        m = self.dimension
        if not 0 <= index < m:
            raise SectorError(f"index {index} outside [0, {m})")
        if self.is_spin:
            return index
        bits, k, r = 0, self.n_particles, index
        for pos in range(self.n_sites - 1, -1, -1):
            if k == 0:
                break
            b = math.comb(pos, k)
            if r >= b:
                bits |= 1 << pos
                r -= b
                k -= 1
        return bits

    def rank_array(self, states: np.ndarray) -> np.ndarray:
        states = np.asarray(states, dtype=np.uint64)
        if self.is_spin:
            return states.astype(np.int64)
        table = binomial_table()
        ranks = np.zeros(states.shape, dtype=np.uint64)
        seen = np.zeros(states.shape, dtype=np.int64)
        for pos in range(self.n_sites):
            occ = ((states >> np.uint64(pos)) & np.uint64(1)).astype(bool)
            seen += occ
            ranks += np.where(occ, table[pos, np.minimum(seen, pos + 1)], np.uint64(0))
        return ranks.astype(np.int64)

    def unrank_array(self, indices: np.ndarray) -> np.ndarray:
        r = np.asarray(indices, dtype=np.uint64).copy()
        if self.is_spin:
            return r
        table = binomial_table()
        k = np.full(r.shape, self.n_particles, dtype=np.int64)
        bits = np.zeros(r.shape, dtype=np.uint64)
        for pos in range(self.n_sites - 1, -1, -1):
            b = table[pos, k]
            take = (k > 0) & (r >= b)
            r -= np.where(take, b, np.uint64(0))
            k -= take
            bits |= np.where(take, np.uint64(1) << np.uint64(pos), np.uint64(0))
        return bits

    def enumerate(self, limit: int = ENUMERATION_LIMIT) -> np.ndarray:
        return enumerate_sector(self, limit)


def enumerate_sector(sector: SectorSpec, limit: int = ENUMERATION_LIMIT) -> np.ndarray:
    """All configurations of ``sector`` in increasing bit-pattern order.

    Increasing numeric order coincides with the combinatorial-number-system
    rank, so ``states[sector.rank(c)] == c``.
    """
    m = sector.dimension
    if m > limit:
        raise DimensionError(f"sector dimension {m} exceeds enumeration limit {limit}")
    n = sector.n_sites
    if sector.is_spin:
        return np.arange(m, dtype=np.uint64)
    p = sector.n_particles
    # rows[k] holds the states of the first n' sites with k particles
    rows = [np.zeros(1, dtype=np.uint64)] + [np.zeros(0, dtype=np.uint64)] * p
    for site in range(n):
        top = np.uint64(1) << np.uint64(site)
        new = [rows[0]]
        for k in range(1, p + 1):
            new.append(np.concatenate([rows[k], rows[k - 1] | top]))
        rows = new
    states = rows[p]
    assert states.size == m
    return states


@dataclass(frozen=True)
class SpaceSplit:
    """Decomposition of the sector into minimal-potential and normal parts.

    ``v_min`` is the extremal integer potential value (before multiplying by
    g). For g < 0 the minimal-energy eigenspace of gV is the maximal-V one and
    ``cond_sign`` is -1.
    """

    m_total: int
    m_cond: int
    v_min: int
    potential: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    method: str = "enumeration"
    cond_sign: int = 1

    def __post_init__(self):
        if not 1 <= self.m_cond <= self.m_total:
            raise ValueError(f"m_cond={self.m_cond} outside [1, m_total={self.m_total}]")

    def is_cond(self, c) -> bool:
        return bool(self.cond_mask(np.array([as_bits(c)], dtype=np.uint64))[0])

    def cond_mask(self, states: np.ndarray) -> np.ndarray:
        return np.asarray(self.potential(np.asarray(states, dtype=np.uint64))) == self.v_min

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.m_cond, self.m_total)


def split_space(model, enumerate_limit: int = ENUMERATION_LIMIT, cross_check: bool = True) -> SpaceSplit:
    """Split the model's sector by the extremal value of its potential.

    Enumeration is used whenever the sector has at most ``enumerate_limit``
    states, the family closed form otherwise. Where both apply the two counts
    must agree.
    """
    from . import models

    sector = models.sector_of(model)
    sign = -1 if model.g < 0 else 1

    def potential(states):
        return models.potential_part_array(model, states)

    closed = models.closed_form_split(model)
    m = sector.dimension
    if m <= enumerate_limit:
        states = enumerate_sector(sector, enumerate_limit)
        values = potential(states)
        v_min = int(values.min()) if sign > 0 else int(values.max())
        m_cond = int(np.count_nonzero(values == v_min))
        if cross_check and closed is not None and closed != (m_cond, v_min):
            raise AssertionError(
                f"{model.family}: enumeration gives (M_cond, V_min)={(m_cond, v_min)}, "
                f"closed form {closed}"
            )
        return SpaceSplit(m, m_cond, v_min, potential, "enumeration", sign)
    if closed is None:
        raise DimensionError(
            f"sector dimension {m} too large to enumerate and no closed form for {model.family}"
        )
    m_cond, v_min = closed
    return SpaceSplit(m, m_cond, v_min, potential, "closed-form", sign)


@dataclass(frozen=True)
class RatioRow:
    n_sites: int
    m_cond: int
    m_total: int
    ratio: Fraction


def ratio_series(
    family,
    density: Fraction | float | str,
    sizes: Sequence[int],
    impurity_fraction: Fraction | float | str | None = None,
    boundary: str = "obc",
    enumerate_limit: int = 1 << 16,
):
    """Exact ``M_cond / M`` along a sequence of sizes at fixed density.

    Returns ``(rows, slope)`` with ``slope`` the least-squares slope of
    ``log(M_cond/M)`` against N. Spin families ignore ``density``.
    """
    from . import models

    density = Fraction(density).limit_denominator(10**6)
    fraction = None if impurity_fraction is None else Fraction(impurity_fraction).limit_denominator(10**6)
    rows = []
    for n in sizes:
        fam = models.Family(family)
        n_p = n_imp = None
        if not models.is_spin_family(fam):
            n_p = density * n
            if n_p.denominator != 1:
                raise ValueError(f"density {density} gives non-integer N_p at N={n}")
            n_p = int(n_p)
            if models.has_impurities(fam):
                if fam == models.Family.FERMION_IMPURITY:
                    if fraction is None:
                        raise ValueError("impurity family needs impurity_fraction")
                    n_imp = fraction * n_p
                    if n_imp.denominator != 1:
                        raise ValueError(f"impurity fraction {fraction} gives non-integer N_imp at N={n}")
                    n_imp = int(n_imp)
        model = models.ModelSpec(fam, n, n_p, n_imp, boundary, 1.0)
        split = split_space(model, enumerate_limit=enumerate_limit)
        rows.append(RatioRow(n, split.m_cond, split.m_total, split.ratio))
    xs = np.array([r.n_sites for r in rows], dtype=float)
    ys = np.array([math.log(r.m_cond) - math.log(r.m_total) for r in rows])
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(rows) >= 2 else float("nan")
    return rows, slope
