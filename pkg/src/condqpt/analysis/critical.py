"""Location of the critical coupling from sampled gap diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import ConfigError

MIN_ROWS = 5
ZERO_TOL = 1e-9


@dataclass(frozen=True)
class CriticalEstimate:
    """``g_c`` is None for a no-crossing verdict."""

    g_c: Optional[float]
    method: str
    uncertainty: Optional[float] = None
    detail: str = ""

    @property
    def verdict(self) -> str:
        return "crossing" if self.g_c is not None else "no-crossing"

    def to_dict(self) -> dict:
        return {
            "g_c": self.g_c if self.g_c is not None else "no-crossing",
            "method": self.method,
            "uncertainty": self.uncertainty,
            "verdict": self.verdict,
            "detail": self.detail,
        }


def _parabola_vertex(x: np.ndarray, y: np.ndarray) -> float:
    """Abscissa of the vertex of the parabola through three points."""
    (x0, x1, x2), (y0, y1, y2) = x, y
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    if a == 0:
        return float(x1)
    return float(np.clip(-b / (2 * a), x0, x2))


def _half_cell(g: np.ndarray, i: int) -> float:
    lo = g[i] - g[i - 1] if i > 0 else g[i + 1] - g[i]
    hi = g[i + 1] - g[i] if i + 1 < len(g) else lo
    return 0.5 * max(lo, hi)


def locate_minimum(g: Sequence[float], values: Sequence[float], method: str = "delta0-min") -> CriticalEstimate:
    """Grid argmin refined by a parabola through the minimum and its neighbours.

    A minimum on either end of the grid gives a no-crossing verdict.
    """
    g = np.asarray(g, dtype=float)
    y = np.asarray(values, dtype=float)
    i = int(np.argmin(y))
    if i == 0 or i == len(g) - 1:
        mono = "monotone" if np.all(np.diff(y[-MIN_ROWS:]) <= 0) or np.all(np.diff(y[:MIN_ROWS]) >= 0) else "edge"
        return CriticalEstimate(None, method, None, f"minimum on the grid boundary ({mono})")
    g_c = _parabola_vertex(g[i - 1:i + 2], y[i - 1:i + 2])
    return CriticalEstimate(g_c, method, _half_cell(g, i), f"grid minimum at g={g[i]:.6g}")


def locate_zero(g: Sequence[float], values: Sequence[float], tol: float = ZERO_TOL,
                method: str = "delta1-min") -> CriticalEstimate:
    """First g where a non-negative diagnostic reaches zero.

    Used on thermodynamic-limit rows, where the condensed and full energies
    coincide exactly beyond a first-order point.
    """
    g = np.asarray(g, dtype=float)
    y = np.asarray(values, dtype=float)
    hits = np.flatnonzero(y <= tol)
    if not hits.size or hits[0] == 0:
        reason = "never reaches zero" if not hits.size else "zero already at the first grid point"
        return CriticalEstimate(None, method, None, f"diagnostic {reason}")
    i = int(hits[0])
    # linear interpolation of the last positive segment down to zero
    g0, g1, y0 = g[i - 1], g[i], y[i - 1]
    slope = (y[i] - y0) / (g1 - g0)
    g_c = float(g0 - y0 / slope) if slope < 0 else float(g1)
    return CriticalEstimate(min(max(g_c, g0), g1), method, 0.5 * (g1 - g0), "diagnostic vanishes")


def locate_knee(g: Sequence[float], values: Sequence[float], method: str = "delta1-min") -> CriticalEstimate:
    """Point of sharpest convex bend of a decreasing diagnostic.

    Finite-size Delta1 falls steeply in the normal phase and flattens once
    the ground state condenses, without a true minimum. The knee is the
    maximum of the discrete second derivative, refined by a parabola through
    it and its neighbours. No crossing is reported when the bend sits at the
    grid edge or when the diagnostic has no convex bend.
    """
    g = np.asarray(g, dtype=float)
    y = np.asarray(values, dtype=float)
    h1 = np.diff(g)
    slope = np.diff(y) / h1
    curv = np.diff(slope) / (0.5 * (h1[:-1] + h1[1:]))
    k = int(np.argmax(curv))
    if curv[k] <= 0:
        return CriticalEstimate(None, method, None, "no convex bend")
    i = k + 1
    if i <= 1 or i >= len(g) - 2:
        return CriticalEstimate(None, method, None, f"bend on the grid boundary at g={g[i]:.6g}")
    left = slope[:k + 1].min()
    right = slope[k + 1:].mean()
    if not (left < 0 and abs(right) < 0.5 * abs(left)):
        return CriticalEstimate(None, method, None, "slopes on both sides of the bend are comparable")
    if 0 < k < len(curv) - 1:
        g_c = _parabola_vertex(g[i - 1:i + 2], -curv[k - 1:k + 2])
    else:
        g_c = float(g[i])
    return CriticalEstimate(g_c, method, _half_cell(g, i), f"sharpest bend at g={g[i]:.6g}")


def locate_critical(rows, diagnostic: str = "delta0") -> CriticalEstimate:
    """Critical coupling from sweep rows.

    ``delta0`` is V-shaped around g_c and uses the refined grid minimum.
    ``delta1`` never rises again past g_c: for finite N the knee of the
    curve is used, for thermodynamic rows the first zero.
    """
    if diagnostic not in ("delta0", "delta1"):
        raise ConfigError(f"diagnostic must be delta0 or delta1, got {diagnostic!r}", "diagnostic")
    rows = sorted(rows, key=lambda r: r.g)
    pts = [(r.g, getattr(r, diagnostic)) for r in rows if getattr(r, diagnostic) is not None]
    if len(pts) < MIN_ROWS:
        raise ConfigError(f"need at least {MIN_ROWS} rows with {diagnostic}, got {len(pts)}", "rows")
    g, y = map(np.asarray, zip(*pts))
    if not np.all(np.isfinite(y)):
        raise ConfigError(f"{diagnostic} contains non-finite values", "rows")
    if diagnostic == "delta0":
        return locate_minimum(g, y, "delta0-min")
    if all(r.n_sites is None for r in rows):
        return locate_zero(g, y, method="delta1-min")
    return locate_knee(g, y, "delta1-min")


def coexistence_analytic(family, density=None) -> CriticalEstimate:
    """Solve eps_cond(g) = eps_norm(g) from thermodynamic closed forms.

    Grover: eps_cond = -g against eps_norm = -1. Attractive chains at half
    filling map to the XXZ chain with anisotropy g/2, whose ground state
    leaves the critical phase at the ferromagnetic point g/2 = 1. Ising:
    eps(g) < -g for every g > 0, so no finite solution exists.
    """
    from ..models import ATTRACTIVE_FAMILIES, Family
    from ..quadratic import pfeuty_epsilon

    fam = Family(family)
    if fam == Family.GROVER:
        return CriticalEstimate(1.0, "analytic-coexistence", 0.0, "-g = -1")
    if fam in ATTRACTIVE_FAMILIES:
        if density is not None and not math.isclose(float(density), 0.5):
            raise ConfigError("closed form available at half filling only", "density")
        return CriticalEstimate(2.0, "analytic-coexistence", 0.0, "XXZ ferromagnetic point g/2 = 1")
    if fam == Family.ISING:
        # eps_cond - eps = sqrt-type excess, positive on any finite grid
        gap = min(-g - pfeuty_epsilon(g) for g in np.linspace(0.0, 50.0, 1001))
        if gap <= 0:
            raise AssertionError("Ising energy met the condensed bound")
        return CriticalEstimate(None, "analytic-coexistence", None, "eps(g) < -g for all g > 0")
    raise ConfigError(f"no thermodynamic closed forms for {fam}", "family")
