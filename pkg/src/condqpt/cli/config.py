"""Run configuration: an INI file with one section per block.

Schema (keys are case-insensitive)::

    [model]
    family   = grover | grover-modified | fermion-impurity | ...
    N        = 12            ; or a list "4, 8, 16" or a range "1-12"
    Np       = 6             ; or omit and give density = 1/2
    Nimp     = 2             ; or impurity_fraction = 1/2
    boundary = obc | pbc

    [sweep]
    g_min = 0
    g_max = 2
    g_step = 0.1             ; or g_list = 0.5, 1.0, 1.5

    [method]
    solver = ed              ; default for every quantity
    full = ed                ; per quantity: ed, symmetric, quadratic,
    cond = closed-form       ; qmc, closed-form, none
    norm = ed

    [mc]
    walkers = 4096
    dt = 8
    blocks = 64
    seed = 1
    burn_in = 0.2
    e_ref = -3.5             ; optional
    workers = 1
    backend = cython | python
    table_defaults = no      ; yes takes dt and blocks from the tables

    [output]
    path = out
    format = csv | json
"""
from __future__ import annotations

import configparser
import math
import os
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from ..analysis.sweep import METHODS, QUANTITIES, resolve_methods, thermodynamic_row
from ..errors import CapabilityError, ConfigError
from ..models import Family, ModelSpec, is_spin_family

OUTPUT_ENV = "CONDQPT_OUTPUT_DIR"
INF = "inf"
FORMATS = ("csv", "json")

SCHEMA = {
    "model": {"family", "n", "np", "nimp", "boundary", "density", "impurity_fraction"},
    "sweep": {"g_min", "g_max", "g_step", "g_list"},
    "method": {"solver", "full", "cond", "norm"},
    "mc": {"walkers", "dt", "blocks", "seed", "burn_in", "e_ref", "workers", "backend", "table_defaults"},
    "output": {"path", "format"},
}


@dataclass(frozen=True)
class ModelBlock:
    family: str
    sizes: tuple
    n_particles: Optional[tuple] = None
    n_impurities: Optional[tuple] = None
    boundary: Optional[str] = None

    @property
    def thermodynamic(self) -> bool:
        return self.sizes == (None,)

    def models(self, g: float = 0.0) -> list[ModelSpec]:
        if self.thermodynamic:
            return []
        out = []
        for i, n in enumerate(self.sizes):
            n_p = None if self.n_particles is None else self.n_particles[i]
            n_imp = None if self.n_impurities is None else self.n_impurities[i]
            out.append(ModelSpec(self.family, n, n_p, n_imp, self.boundary, g))
        return out


@dataclass(frozen=True)
class SweepBlock:
    g_values: tuple
    g_min: Optional[float] = None
    g_max: Optional[float] = None
    g_step: Optional[float] = None


@dataclass(frozen=True)
class McBlock:
    walkers: int = 4096
    dt: float = 8.0
    blocks: int = 64
    seed: int = 1
    burn_in: float = 0.2
    e_ref: Optional[float] = None
    workers: int = 1
    backend: Optional[str] = None
    table_defaults: bool = False


@dataclass(frozen=True)
class RunConfig:
    model: ModelBlock
    sweep: Optional[SweepBlock]
    method: dict
    mc: McBlock = field(default_factory=McBlock)
    output_path: str = "."
    output_format: str = "csv"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"]["sizes"] = [INF if n is None else n for n in self.model.sizes]
        return d


def _int_list(text: str, key: str) -> tuple:
    text = text.strip()
    try:
        if "-" in text and "," not in text and not text.startswith("-"):
            lo, hi = (int(x) for x in text.split("-"))
            if hi < lo:
                raise ValueError
            return tuple(range(lo, hi + 1))
        return tuple(int(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"expected an integer, list or range, got {text!r}", key) from None


def _float(text: str, key: str) -> float:
    try:
        value = float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"expected a number, got {text!r}", key) from None
    if not math.isfinite(value):
        raise ConfigError("value must be finite", key)
    return value


def _fraction(text: str, key: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"expected a fraction such as 1/2, got {text!r}", key) from None


def _bool(text: str, key: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "yes", "true", "on"):
        return True
    if low in ("0", "no", "false", "off"):
        return False
    raise ConfigError(f"expected yes or no, got {text!r}", key)


def _per_size(values: tuple, sizes: tuple, key: str) -> tuple:
    if len(values) == 1:
        return values * len(sizes)
    if len(values) != len(sizes):
        raise ConfigError(f"{len(values)} values for {len(sizes)} sizes", key)
    return values


def _scaled(frac: Fraction, base: tuple, key: str) -> tuple:
    out = []
    for b in base:
        v = frac * b
        if v.denominator != 1:
            raise ConfigError(f"{frac} x {b} is not an integer", key)
        out.append(int(v))
    return tuple(out)


def parse_model(sec: dict, thermodynamic: bool = False) -> ModelBlock:
    if "family" not in sec:
        raise ConfigError("missing key", "model.family")
    try:
        family = Family(sec["family"].strip()).value
    except ValueError:
        raise ConfigError(f"unknown family {sec['family']!r}", "model.family") from None
    if thermodynamic:
        if sec.get("n", "inf").strip() != "inf":
            raise ConfigError("closed-form sweeps are thermodynamic; give N = inf or omit N", "model.N")
        return ModelBlock(family, (None,), boundary=sec.get("boundary", "").strip() or None)
    if sec.get("n", "").strip() == "inf":
        raise ConfigError("N = inf needs solver = closed-form", "model.N")
    if "n" not in sec:
        raise ConfigError("missing key", "model.N")
    sizes = _int_list(sec["n"], "model.N")
    if not sizes:
        raise ConfigError("no sizes given", "model.N")
    n_p = n_imp = None
    if "np" in sec and "density" in sec:
        raise ConfigError("give Np or density, not both", "model.Np")
    if "np" in sec:
        n_p = _per_size(_int_list(sec["np"], "model.Np"), sizes, "model.Np")
    elif "density" in sec:
        n_p = _scaled(_fraction(sec["density"], "model.density"), sizes, "model.density")
    if "nimp" in sec and "impurity_fraction" in sec:
        raise ConfigError("give Nimp or impurity_fraction, not both", "model.Nimp")
    if "nimp" in sec:
        n_imp = _per_size(_int_list(sec["nimp"], "model.Nimp"), sizes, "model.Nimp")
    elif "impurity_fraction" in sec:
        if n_p is None:
            raise ConfigError("impurity_fraction needs Np or density", "model.impurity_fraction")
        n_imp = _scaled(_fraction(sec["impurity_fraction"], "model.impurity_fraction"), n_p,
                        "model.impurity_fraction")
    if is_spin_family(family) and n_p is not None:
        raise ConfigError("spin families take no particle number", "model.Np")
    block = ModelBlock(family, sizes, n_p, n_imp, sec.get("boundary", "").strip() or None)
    block.models()  # runs the model validation for every size
    return block


def grid_from(g_min: float, g_max: float, g_step: float) -> tuple:
    if not g_min < g_max:
        raise ConfigError(f"need g_min < g_max, got {g_min} and {g_max}", "sweep.g_min")
    if not g_step > 0:
        raise ConfigError(f"need g_step > 0, got {g_step}", "sweep.g_step")
    count = int(math.floor((g_max - g_min) / g_step + 1e-9)) + 1
    return tuple(float(np.round(g_min + i * g_step, 12)) for i in range(count))


def parse_sweep(sec: Optional[dict]) -> Optional[SweepBlock]:
    if sec is None:
        return None
    if "g_list" in sec:
        if {"g_min", "g_max", "g_step"} & set(sec):
            raise ConfigError("give g_list or g_min/g_max/g_step, not both", "sweep.g_list")
        values = tuple(sorted(_float(x, "sweep.g_list") for x in sec["g_list"].replace(",", " ").split()))
        if not values:
            raise ConfigError("empty list", "sweep.g_list")
        if len(set(values)) != len(values):
            raise ConfigError("repeated coupling", "sweep.g_list")
        return SweepBlock(values)
    for key in ("g_min", "g_max", "g_step"):
        if key not in sec:
            raise ConfigError("missing key", f"sweep.{key}")
    g_min, g_max, g_step = (_float(sec[k], f"sweep.{k}") for k in ("g_min", "g_max", "g_step"))
    return SweepBlock(grid_from(g_min, g_max, g_step), g_min, g_max, g_step)


def parse_method(sec: Optional[dict]) -> dict:
    sec = dict(sec or {})
    base = sec.pop("solver", "ed").strip()
    out = {"full": base}
    for q in QUANTITIES:
        if q in sec:
            out[q] = sec[q].strip()
    for q, v in out.items():
        if v not in METHODS:
            raise ConfigError(f"unknown solver {v!r}; choose from {', '.join(METHODS)}", f"method.{q}")
    return out


def parse_mc(sec: Optional[dict]) -> McBlock:
    sec = sec or {}
    kw = {}
    for key, conv in (("walkers", int), ("blocks", int), ("seed", int), ("workers", int)):
        if key in sec:
            try:
                kw[key] = conv(sec[key].strip())
            except ValueError:
                raise ConfigError(f"expected an integer, got {sec[key]!r}", f"mc.{key}") from None
    for key in ("dt", "burn_in", "e_ref"):
        if key in sec:
            kw[key] = _float(sec[key], f"mc.{key}")
    if "backend" in sec:
        kw["backend"] = sec["backend"].strip() or None
    if "table_defaults" in sec:
        kw["table_defaults"] = _bool(sec["table_defaults"], "mc.table_defaults")
    block = McBlock(**kw)
    if block.walkers < 2:
        raise ConfigError("need at least 2 walkers", "mc.walkers")
    if block.blocks < 2:
        raise ConfigError("need at least 2 blocks", "mc.blocks")
    if not block.dt > 0:
        raise ConfigError("dt must be positive", "mc.dt")
    if not 0 <= block.burn_in < 1:
        raise ConfigError("burn_in must lie in [0, 1)", "mc.burn_in")
    if not 0 <= block.seed < 1 << 64:
        raise ConfigError("seed must fit in 64 unsigned bits", "mc.seed")
    if block.workers < 1:
        raise ConfigError("workers must be positive", "mc.workers")
    if block.backend not in (None, "cython", "python"):
        raise ConfigError(f"unknown backend {block.backend!r}", "mc.backend")
    return block


def _sections(parser: configparser.ConfigParser) -> dict:
    out = {}
    for name in parser.sections():
        low = name.lower()
        if low not in SCHEMA:
            raise ConfigError(f"unknown section [{name}]", name)
        items = {k.lower(): v for k, v in parser.items(name)}
        for k in items:
            if k not in SCHEMA[low]:
                raise ConfigError("unknown key", f"{low}.{k}")
        out[low] = items
    return out


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " "), source) from None
    return config_from_sections(_sections(parser))


def config_from_sections(secs: dict) -> RunConfig:
    if "model" not in secs:
        raise ConfigError("missing [model] section", "model")
    out = secs.get("output", {})
    fmt = out.get("format", "csv").strip().lower()
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}", "output.format")
    path = out.get("path", "").strip() or os.environ.get(OUTPUT_ENV, ".")
    method = parse_method(secs.get("method"))
    model = parse_model(secs["model"], thermodynamic=method["full"] == "closed-form")
    check_solvers(model, method)
    return RunConfig(
        model=model,
        sweep=parse_sweep(secs.get("sweep")),
        method=method,
        mc=parse_mc(secs.get("mc")),
        output_path=path,
        output_format=fmt,
    )


def check_solvers(model: ModelBlock, method: dict) -> None:
    """Reject solver choices the family cannot honour before anything runs."""
    if model.thermodynamic:
        try:
            thermodynamic_row(model.family, 1.0)
        except CapabilityError as exc:
            raise ConfigError(str(exc), "method.full") from None
        return
    for spec in model.models(1.0):
        resolve_methods(spec, method)
        if "qmc" in method.values() and spec.family == Family.COUNTER_EXAMPLE.value:
            raise ConfigError("the counter-example is outside the Monte Carlo scope", "method")


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path) from None
    return parse_config_text(text, path)
