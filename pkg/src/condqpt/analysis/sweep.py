"""Energies and gap diagnostics along a grid of couplings."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence

from .. import exact, models, quadratic
from ..basis import split_space
from ..errors import CapabilityError, ConfigError
from ..models import Family, ModelSpec
from ..qmc import McConfig, run_projector_mc
from .specular import specular_split

METHODS = ("ed", "symmetric", "quadratic", "qmc", "closed-form", "none")
QUANTITIES = ("full", "cond", "norm")
VARIATIONAL_TOL = 1e-9


@dataclass(frozen=True)
class SweepRow:
    """One coupling of a sweep.

    Energies are per particle (per site for spin families). The gap columns
    are total energies for finite N and per-particle values for
    thermodynamic rows, which carry ``n_sites=None``.
    """

    g: float
    n_sites: Optional[int]
    n_particles: Optional[int]
    e_over_np: float
    e_cond_over_np: float
    e_norm_over_np: Optional[float]
    delta: Optional[float]
    delta0: Optional[float]
    delta1: float
    e_solver: str
    enorm_solver: str
    mc_stderr: Optional[float] = None
    econd_solver: str = "closed-form"
    flags: tuple = ()


@dataclass(frozen=True)
class _Energy:
    value: float
    solver: str
    gap: Optional[float] = None
    stderr: Optional[float] = None


def _is_quadratic(model: ModelSpec) -> bool:
    return model.family in (Family.FERMION_IMPURITY, Family.FERMION_IMPURITY_EXTENSIVE)


def resolve_methods(model: ModelSpec, method: str | Mapping[str, str]) -> dict:
    """Solver per quantity (full, cond, norm) from a single name or a mapping."""
    if isinstance(method, Mapping):
        out = dict(method)
        base = out.get("full", "ed")
    else:
        base, out = method, {}
    if base not in METHODS:
        raise ConfigError(f"unknown method {base!r}; choose from {METHODS}", "method.full")
    out.setdefault("full", base)
    if "cond" not in out:
        has_closed = models.closed_form_e_cond(model) is not None
        out["cond"] = "closed-form" if has_closed or base in ("quadratic", "closed-form") else base
    if "norm" not in out:
        if base in ("ed", "symmetric"):
            out["norm"] = base
        elif model.family in (Family.FERMION_IMPURITY_EXTENSIVE, Family.GROVER_MODIFIED, Family.COUNTER_EXAMPLE):
            out["norm"] = "closed-form"
        else:
            out["norm"] = "none"
    for q in QUANTITIES:
        if out[q] not in METHODS:
            raise ConfigError(f"unknown method {out[q]!r}", f"method.{q}")
    if out["full"] == "none":
        raise ConfigError("the full-space energy needs a solver", "method.full")
    if "symmetric" in out.values() and model.family != Family.GROVER:
        raise ConfigError("the symmetric solver applies to the Grover family only", "method")
    if out["full"] == "quadratic" and not _is_quadratic(model):
        raise ConfigError(f"{model.family} is not quadratic", "method.full")
    return out


def _quadratic_full(model: ModelSpec) -> _Energy:
    n, n_p, g = model.n_sites, model.n_particles, model.g
    if model.family == Family.FERMION_IMPURITY:
        spec = quadratic.impurity_spectrum(n, model.n_impurities, g, model.boundary)
    else:
        spec = quadratic.impurity_spectrum(n, 1, g * n_p, model.boundary)
    filled = quadratic.fill(spec, n_p)
    gap = filled.gap if math.isfinite(filled.gap) else None
    return _Energy(filled.energy, "quadratic", gap)


def _full_energy(model: ModelSpec, how: str, mc: Optional[McConfig], want_gap: bool) -> _Energy:
    if how == "ed":
        r = exact.ground_state(model, "full", want_gap)
        return _Energy(r.e0, r.solver, r.gap)
    if how == "symmetric":
        r = exact.grover_symmetric_ground(model.n_sites, model.g, "full")
        return _Energy(r.e0, r.solver, r.gap if want_gap else None)
    if how == "quadratic":
        return _quadratic_full(model)
    if how == "qmc":
        est = run_projector_mc(model, None, replace(mc or McConfig(), restriction="full"))
        return _Energy(est.energy, "qmc", None, est.std_error)
    raise CapabilityError(f"no {how} solver for the full-space energy of {model.family}")


def _closed_norm(model: ModelSpec) -> Optional[float]:
    fam, n = model.family, model.n_sites
    if fam == Family.FERMION_IMPURITY_EXTENSIVE:
        return model.n_particles * quadratic.modified_impurity_energies(n, model.n_particles, model.g)[1]
    if fam in (Family.GROVER_MODIFIED, Family.COUNTER_EXAMPLE):
        return n * specular_split(fam, model.g, n).e_norm
    return None


def _restricted_energy(model: ModelSpec, mode: str, how: str, mc: Optional[McConfig]) -> Optional[_Energy]:
    if how == "none":
        return None
    if how == "closed-form":
        value = models.closed_form_e_cond(model) if mode == "cond" else _closed_norm(model)
        if value is None:
            raise CapabilityError(f"no closed form for E_{mode} of {model.label()}")
        return _Energy(value, "closed-form")
    if how == "symmetric":
        r = exact.grover_symmetric_ground(model.n_sites, model.g, mode)
        return _Energy(r.e0, r.solver)
    split = split_space(model)
    if how == "ed":
        r = exact.ground_state(model, exact.SubspaceSelector(mode, split))
        return _Energy(r.e0, r.solver)
    if how == "qmc":
        est = run_projector_mc(model, split, replace(mc or McConfig(), restriction=mode))
        return _Energy(est.energy, "qmc", None, est.std_error)
    raise CapabilityError(f"no {how} solver for E_{mode}")


def sweep_point(model: ModelSpec, methods: Mapping[str, str], mc: Optional[McConfig] = None,
                want_gap: bool = True) -> SweepRow:
    full = _full_energy(model, methods["full"], mc, want_gap)
    cond = _restricted_energy(model, "cond", methods["cond"], mc)
    if cond is None:
        raise ConfigError("E_cond is required for the gap diagnostics", "method.cond")
    norm = _restricted_energy(model, "norm", methods["norm"], mc)
    n_p = model.n_eff_particles
    flags = []
    errs = [x.stderr for x in (full, cond, norm) if x is not None and x.stderr is not None]
    bound = min(cond.value, norm.value) if norm is not None else cond.value
    if errs:
        sigma = math.sqrt(sum(e * e for e in errs))
        if full.value > bound + 3 * sigma:
            flags.append("variational-violation")
    elif full.value > bound + VARIATIONAL_TOL * max(1.0, abs(full.value)):
        raise AssertionError(
            f"E={full.value} above min(E_cond, E_norm)={bound} for {model.label()} at g={model.g}"
        )
    return SweepRow(
        g=model.g,
        n_sites=model.n_sites,
        n_particles=n_p,
        e_over_np=full.value / n_p,
        e_cond_over_np=cond.value / n_p,
        e_norm_over_np=None if norm is None else norm.value / n_p,
        delta=full.gap,
        delta0=None if norm is None else abs(cond.value - norm.value),
        delta1=abs(cond.value - full.value),
        e_solver=full.solver,
        enorm_solver="" if norm is None else norm.solver,
        mc_stderr=full.stderr,
        econd_solver=cond.solver,
        flags=tuple(flags),
    )


def thermodynamic_row(family, g: float) -> SweepRow:
    """Closed-form N -> infinity energies per particle."""
    fam = Family(family)
    e_norm = None
    if fam == Family.ISING:
        e, e_cond = quadratic.pfeuty_epsilon(g), -g
    elif fam == Family.GROVER:
        e, e_cond, e_norm = min(-1.0, -g), -g, -1.0
    elif fam == Family.COUNTER_EXAMPLE:
        rep = specular_split(fam, g)
        e, e_cond, e_norm = rep.e_exact, rep.e_cond, rep.e_norm
    elif fam == Family.GROVER_MODIFIED:
        rep = specular_split(fam, g)
        e, e_cond, e_norm = min(rep.e_cond_primed, rep.e_norm_primed), rep.e_cond, rep.e_norm
    else:
        raise CapabilityError(f"no thermodynamic closed form for {fam}")
    return SweepRow(
        g=g, n_sites=None, n_particles=None,
        e_over_np=e, e_cond_over_np=e_cond, e_norm_over_np=e_norm,
        delta=None,
        delta0=None if e_norm is None else abs(e_cond - e_norm),
        delta1=abs(e_cond - e),
        e_solver="closed-form", enorm_solver="" if e_norm is None else "closed-form",
    )


def sweep(model: ModelSpec, g_grid: Sequence[float], method: str | Mapping[str, str] = "ed",
          mc: Optional[McConfig] = None, want_gap: bool = True, workers: int = 1) -> list[SweepRow]:
    """One row per coupling, ordered by g.

    ``method="closed-form"`` returns thermodynamic rows for the family of
    ``model``; its size is ignored.
    """
    grid = sorted(float(g) for g in g_grid)
    if not grid:
        raise ConfigError("empty g grid", "sweep")
    if method == "closed-form":
        return [thermodynamic_row(model.family, g) for g in grid]
    methods = resolve_methods(model, method)
    if "qmc" in methods.values() and workers > 1:
        workers = 1  # the Monte Carlo already threads over walkers

    def one(g):
        return sweep_point(model.with_g(g), methods, mc, want_gap)

    if workers <= 1:
        return [one(g) for g in grid]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(one, grid))
