"""Closed forms for the split with the roles of K and V exchanged."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from ..errors import CapabilityError
from ..models import Family


@dataclass(frozen=True)
class SpecularReport:
    """Per-site energies of both splits at one N and g.

    ``n_sites=None`` gives the thermodynamic values (1/N terms dropped).
    Primed quantities belong to the split with K and V exchanged.
    """

    family: Family
    n_sites: Optional[int]
    g: float
    m_cond_fraction: float
    e_cond: float
    e_norm: float
    m_cond_primed_fraction: Optional[float]
    e_cond_primed: float
    e_norm_primed: float
    e_exact: Optional[float] = None
    e_excited: Optional[float] = None

    @property
    def restricted_min(self) -> float:
        return min(self.e_cond, self.e_norm, self.e_cond_primed, self.e_norm_primed)

    @property
    def primed_cross(self) -> bool:
        """Whether the primed energies are ordered differently at this g."""
        return self.e_cond_primed < self.e_norm_primed


def specular_split(family, g: float, n_sites: Optional[int] = None) -> SpecularReport:
    """Both splits of the modified Grover model or the counter-example.

    Fractions are M_cond / M; for the modified Grover model M'_cond = 1.
    """
    fam = Family(family)
    inv_n = 0.0 if n_sites is None else 1.0 / n_sites
    if fam == Family.GROVER_MODIFIED:
        primed = None if n_sites is None else 2.0 ** -n_sites
        return SpecularReport(
            fam, n_sites, g, 0.5,
            e_cond=-1.0 - g + inv_n,
            e_norm=-1.0 + inv_n,
            m_cond_primed_fraction=primed,
            e_cond_primed=-1.0 - g / 2.0,
            e_norm_primed=-1.0 - g + 3.0 * inv_n,
        )
    if fam == Family.COUNTER_EXAMPLE:
        root = 0.5 * math.sqrt(1.0 + g * g)
        return SpecularReport(
            fam, n_sites, g, 0.5,
            e_cond=-0.5 - g,
            e_norm=-0.5,
            m_cond_primed_fraction=0.5,
            e_cond_primed=-1.0 - g / 2.0,
            e_norm_primed=-g / 2.0,
            e_exact=-0.5 * (1.0 + g) - root,
            e_excited=-0.5 * (1.0 + g) + root,
        )
    raise CapabilityError(f"specular split tabulated for grover-modified and counter-example, not {fam}")


def modified_grover_exact(n_sites: int, g: float) -> float:
    """E/N of the modified Grover model: N-1 free spins plus one 2x2 block."""
    n = n_sites
    return (-(n - 1) - g * n / 2.0 - math.sqrt(1.0 + (g * n / 2.0) ** 2)) / n
