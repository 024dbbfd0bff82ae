"""Continuous-time projector Monte Carlo with population reconfiguration.

Each walker follows the Poisson process of the hopping graph: it waits an
exponential time of rate kappa(c) (the number of allowed neighbours), then
jumps to one of them uniformly. Over a sojourn of length tau its log-weight
grows by (kappa - D + E_ref) tau, with D the diagonal of H. The weighted
paths reproduce <m| exp(-(H - E_ref) t) |n> for stoquastic H with unit
hopping. After each block of length dt the population is resampled in
proportion to the weights, which are then reset.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .. import models
from ..basis import SpaceSplit, enumerate_sector, split_space
from ..errors import (
    CapabilityError,
    ConfigError,
    ConvergenceError,
    EmptySubspaceError,
    SignProblemError,
)
from ..models import Family, ModelSpec
from . import _rng
from .backend import load_backend

RESTRICTIONS = {"full": 0, "cond": 1, "norm": 2}
INIT_ENUMERATION_LIMIT = 1 << 22
MAX_REJECTION_ROUNDS = 4096

_FAMILY_CODES = {
    Family.GROVER: 0,
    Family.GROVER_MODIFIED: 1,
    Family.FERMION_IMPURITY_EXTENSIVE: 1,
    Family.ISING: 2,
    Family.FERMION_IMPURITY: 3,
    Family.FERMION_ATTRACTIVE: 4,
    Family.BOSON_ATTRACTIVE: 4,
}


class FeasibilityWarning(UserWarning):
    """Block length too short for the walkers to move."""


@dataclass(frozen=True)
class McConfig:
    walkers: int = 4096
    dt: float = 8.0
    blocks: int = 64
    burn_in_fraction: float = 0.2
    reference_energy: Optional[float] = None
    seed: int = 0
    restriction: str = "full"
    workers: int = 1
    backend: Optional[str] = None
    bin_size: int = 1

    def __post_init__(self):
        if int(self.walkers) != self.walkers or self.walkers < 2:
            raise ConfigError(f"need at least 2 walkers, got {self.walkers}", "walkers")
        if int(self.blocks) != self.blocks or self.blocks < 2:
            raise ConfigError(f"need at least 2 blocks, got {self.blocks}", "blocks")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt}", "dt")
        if not 0 <= self.burn_in_fraction < 1:
            raise ConfigError(f"burn_in_fraction must lie in [0, 1), got {self.burn_in_fraction}", "burn_in")
        if self.restriction not in RESTRICTIONS:
            raise ConfigError(f"restriction must be one of {tuple(RESTRICTIONS)}", "restriction")
        if not 0 <= int(self.seed) < 1 << 64:
            raise ConfigError("seed must fit in 64 unsigned bits", "seed")
        if self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}", "workers")
        if self.bin_size < 1:
            raise ConfigError(f"bin_size must be positive, got {self.bin_size}", "bin_size")
        if self.n_blocks_used // self.bin_size < 2:
            raise ConfigError("fewer than two post burn-in bins remain", "blocks")

    @property
    def n_blocks_used(self) -> int:
        keep = Fraction(1) - Fraction(repr(float(self.burn_in_fraction)))
        return math.floor(self.blocks * keep)


@dataclass(frozen=True)
class BlockRecord:
    block: int
    log_wbar: float
    jumps: int
    jump_rate: float
    energy: float

    @property
    def wbar(self) -> float:
        return math.exp(self.log_wbar) if self.log_wbar < 709 else math.inf


@dataclass(frozen=True)
class McEstimate:
    energy: float
    std_error: float
    n_blocks_used: int
    mean_jumps_per_unit_time: float
    reference_energy: float
    backend: str
    trace: tuple = field(repr=False)
    config: Optional[McConfig] = field(default=None, repr=False)


def kernel_params(model: ModelSpec, split: Optional[SpaceSplit], restriction: str,
                  e_ref: float, dt: float) -> tuple:
    """Flat parameter tuple understood by both kernel backends."""
    fam = model.family
    if fam not in _FAMILY_CODES:
        raise CapabilityError(
            f"{fam} has hopping amplitudes of magnitude other than 1; projector MC supports unit hops only"
        )
    n = model.n_sites
    spin = models.is_spin_family(fam)
    bond_mask = models.bond_mask(model)
    n_bonds = bin(bond_mask).count("1")
    vscale = n
    if fam == Family.FERMION_IMPURITY_EXTENSIVE:
        vscale = model.n_particles
    imp_mask = (1 << model.n_impurities) - 1 if fam == Family.FERMION_IMPURITY else 0
    mode = RESTRICTIONS[restriction]
    vmin = split.v_min if mode else 0
    n_cand = n if spin else n_bonds
    return (_FAMILY_CODES[fam], n, int(not spin), n_cand, mode, bond_mask, imp_mask,
            vscale, n_bonds, vmin, float(model.g), float(e_ref), float(dt), (1 << n) - 1)


def _allowed_mask(split: Optional[SpaceSplit], mode: int, states: np.ndarray) -> np.ndarray:
    if mode == 0:
        return np.ones(len(states), dtype=bool)
    cond = split.cond_mask(states)
    return cond if mode == 1 else ~cond


def initial_states(model: ModelSpec, split: Optional[SpaceSplit], restriction: str,
                   walkers: int, seed: int) -> np.ndarray:
    """Uniform draw among configurations that satisfy the restriction."""
    mode = RESTRICTIONS[restriction]
    sector = models.sector_of(model)
    keys = _rng.walker_keys(seed, _rng.INIT_BLOCK, np.arange(walkers, dtype=np.uint64))
    if sector.dimension <= INIT_ENUMERATION_LIMIT:
        pool = enumerate_sector(sector, INIT_ENUMERATION_LIMIT)
        pool = pool[_allowed_mask(split, mode, pool)]
        if not len(pool):
            raise EmptySubspaceError(f"{restriction} subspace of {model.label()} is empty")
        u = _rng.to_unit(_rng.draw_array(keys, np.zeros(walkers, dtype=np.uint64)))
        idx = np.minimum((u * len(pool)).astype(np.int64), len(pool) - 1)
        return pool[idx]
    out = np.zeros(walkers, dtype=np.uint64)
    pending = np.arange(walkers)
    for rnd in range(MAX_REJECTION_ROUNDS):
        x = _rng.draw_array(keys[pending], np.full(len(pending), rnd, dtype=np.uint64))
        if sector.is_spin:
            cand = x >> np.uint64(64 - sector.n_sites) if sector.n_sites < 64 else x
        else:
            u = _rng.to_unit(x)
            idx = np.minimum((u * float(sector.dimension)).astype(np.uint64), np.uint64(sector.dimension - 1))
            cand = sector.unrank_array(idx)
        ok = _allowed_mask(split, mode, cand)
        out[pending[ok]] = cand[ok]
        pending = pending[~ok]
        if not len(pending):
            return out
    raise EmptySubspaceError(
        f"rejection sampling found no {restriction} configuration for {len(pending)} walkers"
    )


def systematic_resample(logw: np.ndarray, u0: float) -> np.ndarray:
    """Indices of the resampled population; exactly len(logw) of them."""
    n = len(logw)
    p = np.exp(logw - logw.max())
    cum = np.cumsum(p)
    positions = (np.arange(n) + u0) * (cum[-1] / n)
    return np.minimum(np.searchsorted(cum, positions, side="right"), n - 1)


def jackknife(values: Sequence[float], bin_size: int = 1) -> tuple[float, float]:
    """Mean and jackknife standard error over bins of consecutive values."""
    v = np.asarray(values, dtype=float)
    n_bins = len(v) // bin_size
    v = v[len(v) - n_bins * bin_size:].reshape(n_bins, bin_size).mean(axis=1)
    total = v.sum()
    loo = (total - v) / (n_bins - 1)
    mean = float(v.mean())
    var = (n_bins - 1) / n_bins * float(np.sum((loo - loo.mean()) ** 2))
    return mean, math.sqrt(var)


def default_reference_energy(model: ModelSpec) -> float:
    e = models.closed_form_e_cond(model)
    return float(e) if e is not None else 0.0


def _check_runnable(model: ModelSpec):
    verdict = models.stoquastic_check(model)
    if not verdict.stoquastic:
        raise SignProblemError(
            f"{model.label()} has a positive off-diagonal element; projector MC would face a sign problem",
            verdict.witness,
        )


def run_projector_mc(model: ModelSpec, split: Optional[SpaceSplit] = None,
                     cfg: Optional[McConfig] = None) -> McEstimate:
    """Ground energy of P H P by projector Monte Carlo.

    ``cfg.restriction`` selects the full space, F_cond or F_norm. Raises
    SignProblemError on non-stoquastic input and EmptySubspaceError when no
    configuration satisfies the restriction.
    """
    cfg = cfg or McConfig()
    _check_runnable(model)
    mode = RESTRICTIONS[cfg.restriction]
    if mode and split is None:
        split = split_space(model)
    e_ref = cfg.reference_energy
    if e_ref is None:
        e_ref = default_reference_energy(model)
    e0 = abs(models.kinetic_ground_energy(model))
    if cfg.dt * e0 < 1:
        warnings.warn(
            f"dt * |E^(0)| = {cfg.dt * e0:.3g} < 1: walkers barely move within a block",
            FeasibilityWarning,
            stacklevel=2,
        )
    params = kernel_params(model, split, cfg.restriction, e_ref, cfg.dt)
    backend_name, kernel = load_backend(cfg.backend)

    w = int(cfg.walkers)
    states = initial_states(model, split, cfg.restriction, w, cfg.seed)
    ref_v = models.potential_part_array(model, states)
    ker_v = _potential_from_params(states, params)
    assert np.array_equal(ref_v, ker_v), "kernel potential disagrees with the model"

    logw = np.zeros(w)
    jumps = np.zeros(w, dtype=np.int64)
    bounds = np.linspace(0, w, min(cfg.workers, w) + 1).astype(int)
    chunks = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    log_w = math.log(w)
    records = []
    pool = ThreadPoolExecutor(len(chunks)) if len(chunks) > 1 else None
    try:
        for blk in range(cfg.blocks):
            if pool is None:
                kernel.propagate(states, logw, jumps, 0, w, params, cfg.seed, blk)
            else:
                futures = [pool.submit(kernel.propagate, states, logw, jumps, a, b, params, cfg.seed, blk)
                           for a, b in chunks]
                for f in futures:
                    f.result()
            if not np.isfinite(logw).all():
                raise ConvergenceError(f"walker weights diverged in block {blk}")
            if mode == 2 and split.cond_mask(states).any():
                raise AssertionError(f"walker entered F_cond under the norm restriction in block {blk}")
            log_wbar = float(logsumexp(logw)) - log_w
            p = np.exp(logw - logw.max())
            rate = float(p @ jumps) / (float(p.sum()) * cfg.dt)
            records.append(BlockRecord(blk, log_wbar, int(jumps.sum()), rate, e_ref - log_wbar / cfg.dt))
            u0 = _rng.unit(_rng.draw(_rng.walker_key(cfg.seed, blk, _rng.RESAMPLE_WALKER), 0))
            states = states[systematic_resample(logw, u0)]
    finally:
        if pool is not None:
            pool.shutdown()

    used = records[cfg.blocks - cfg.n_blocks_used:]
    energy, err = jackknife([r.energy for r in used], cfg.bin_size)
    rate = float(np.mean([r.jump_rate for r in used]))
    return McEstimate(energy, err, cfg.n_blocks_used, rate, e_ref, backend_name, tuple(records), cfg)


def _potential_from_params(states: np.ndarray, params: tuple) -> np.ndarray:
    from . import _kernel_py

    return _kernel_py.potential(states, params)


def mean_jump_rate(model: ModelSpec, cfg: McConfig, split: Optional[SpaceSplit] = None) -> float:
    """Weighted jumps per unit imaginary time per walker; tends to |E^(0)| at g = 0."""
    return run_projector_mc(model, split, cfg).mean_jumps_per_unit_time


TRACE_COLUMNS = ("block", "wbar", "log_wbar", "jumps", "jump_rate", "energy")


def trace_csv(estimate: McEstimate) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for r in estimate.trace:
        writer.writerow([r.block, repr(r.wbar), repr(r.log_wbar), r.jumps, repr(r.jump_rate), repr(r.energy)])
    return buf.getvalue()


# Statistical parameters per system size: N -> (dt, blocks)
TABLE_IMPURITY = {4: (16, 64), 8: (16, 128), 16: (16, 256), 32: (32, 512), 64: (32, 1024)}
TABLE_INTERACTING = {4: (16, 64), 8: (16, 128), 16: (16, 256), 32: (64, 512), 64: (64, 1024), 128: (64, 2048)}
DEFAULT_WALKERS = 1 << 16


def table_defaults(family, n_sites: int, walkers: int = DEFAULT_WALKERS, **overrides) -> McConfig:
    """Tabulated (dt, blocks) for the impurity and interacting families."""
    fam = Family(family)
    if fam in (Family.FERMION_IMPURITY, Family.FERMION_IMPURITY_EXTENSIVE):
        table = TABLE_IMPURITY
    elif fam in models.ATTRACTIVE_FAMILIES:
        table = TABLE_INTERACTING
    else:
        raise ConfigError(f"no tabulated Monte Carlo parameters for {fam}", "family")
    row = n_sites
    if row not in table:
        row = min(table, key=lambda k: (abs(k - n_sites), k))
        warnings.warn(f"N={n_sites} not tabulated for {fam}; using the N={row} row", stacklevel=2)
    dt, blocks = table[row]
    return replace(McConfig(walkers=walkers, dt=float(dt), blocks=blocks), **overrides)
