"""Subcommands: split, sweep, locate, qmc-trace and defaults."""
from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, replace
from fractions import Fraction
from typing import Optional, Sequence

from .. import __version__
from ..analysis import locate_critical, resolve_methods, sweep_point, thermodynamic_row
from ..basis import split_space
from ..errors import CondQPTError, ConfigError
from ..models import ModelSpec
from ..qmc import McConfig, run_projector_mc, table_defaults, trace_csv
from ..qmc.engine import TABLE_IMPURITY, TABLE_INTERACTING
from . import output
from .config import OUTPUT_ENV, RunConfig, SCHEMA, config_from_sections

# flag dest -> (section, key)
FLAG_KEYS = {
    "family": ("model", "family"), "N": ("model", "n"), "Np": ("model", "np"),
    "Nimp": ("model", "nimp"), "boundary": ("model", "boundary"), "density": ("model", "density"),
    "impurity_fraction": ("model", "impurity_fraction"),
    "g_min": ("sweep", "g_min"), "g_max": ("sweep", "g_max"), "g_step": ("sweep", "g_step"),
    "g_list": ("sweep", "g_list"),
    "solver": ("method", "solver"), "full": ("method", "full"), "cond": ("method", "cond"),
    "norm": ("method", "norm"),
    "walkers": ("mc", "walkers"), "dt": ("mc", "dt"), "blocks": ("mc", "blocks"), "seed": ("mc", "seed"),
    "burn_in": ("mc", "burn_in"), "e_ref": ("mc", "e_ref"), "workers": ("mc", "workers"),
    "backend": ("mc", "backend"), "table_defaults": ("mc", "table_defaults"),
    "output": ("output", "path"), "format": ("output", "format"),
}
FAMILY_ALIASES = {"ising": "ising-transverse", "hardcore-boson": "hardcore-boson-attractive"}


def _add_config_flags(p: argparse.ArgumentParser, sections: Sequence[str]) -> None:
    p.add_argument("-c", "--config", help="INI run configuration; flags override its values")
    for dest, (sec, key) in FLAG_KEYS.items():
        if sec not in sections:
            continue
        flag = "--" + dest.replace("_", "-")
        if dest == "output":
            p.add_argument("-o", flag, dest=dest, help=f"output directory (default ${OUTPUT_ENV} or .)")
        else:
            p.add_argument(flag, dest=dest, help=f"[{sec}] {key}")


def _read_sections(path: Optional[str]) -> dict:
    if path is None:
        return {}
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh, source=path)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path) from None
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " "), path) from None
    out = {}
    for name in parser.sections():
        low = name.lower()
        if low not in SCHEMA:
            raise ConfigError(f"unknown section [{name}]", f"{path}: {name}")
        items = {k.lower(): v for k, v in parser.items(name)}
        for k in items:
            if k not in SCHEMA[low]:
                raise ConfigError("unknown key", f"{path}: {low}.{k}")
        out[low] = items
    return out


def merged_sections(args: argparse.Namespace) -> dict:
    """Config file sections with command-line flags layered on top."""
    secs = _read_sections(getattr(args, "config", None))
    for dest, (sec, key) in FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            secs.setdefault(sec, {})[key] = str(value)
    model = secs.get("model", {})
    if "family" in model:
        model["family"] = FAMILY_ALIASES.get(model["family"].strip(), model["family"].strip())
    return secs


def _mc_config(cfg: RunConfig, spec: ModelSpec) -> McConfig:
    mc = cfg.mc
    kw = dict(walkers=mc.walkers, seed=mc.seed, burn_in_fraction=mc.burn_in,
              reference_energy=mc.e_ref, workers=mc.workers, backend=mc.backend)
    if mc.table_defaults:
        return table_defaults(spec.family, spec.n_sites, **kw)
    return McConfig(dt=mc.dt, blocks=mc.blocks, **kw)


# ----------------------------------------------------------------------------- split

def _ratio_text(r: Fraction) -> str:
    if r == 1:
        return "1"
    if r.numerator == 1 and r.denominator & (r.denominator - 1) == 0:
        return f"2^-{r.denominator.bit_length() - 1}"
    return f"{r.numerator}/{r.denominator}"


def cmd_split(args) -> int:
    cfg = config_from_sections(merged_sections(args))
    if cfg.model.thermodynamic:
        raise ConfigError("split needs finite sizes", "model.N")
    records = []
    for spec in cfg.model.models(1.0):
        s = split_space(spec)
        records.append({
            "family": spec.family.value, "N": spec.n_sites, "Np": spec.n_particles,
            "Nimp": spec.n_impurities, "M": s.m_total, "M_cond": s.m_cond, "V_min": s.v_min,
            "ratio": _ratio_text(s.ratio), "log_ratio": math.log(s.m_cond) - math.log(s.m_total),
            "method": s.method,
        })
    slope = None
    if len(records) >= 2:
        xs = [r["N"] for r in records]
        ys = [r["log_ratio"] for r in records]
        mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
        slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)
    if args.json:
        print(json.dumps({"rows": records, "log_ratio_slope": slope}, indent=1))
        return 0
    for r in records:
        extra = "" if r["Np"] is None else f" Np={r['Np']}"
        extra += "" if r["Nimp"] is None else f" Nimp={r['Nimp']}"
        print(f"{r['family']} N={r['N']}{extra}: M={r['M']} M_cond={r['M_cond']} ratio={r['ratio']}")
    if slope is not None:
        print(f"log(M_cond/M) slope per site: {slope:.6g}")
    return 0


# ----------------------------------------------------------------------------- sweep

def _sweep_rows(cfg: RunConfig, spec: Optional[ModelSpec], jobs: int) -> list:
    grid = cfg.sweep.g_values
    if spec is None:
        return [thermodynamic_row(cfg.model.family, g) for g in grid]
    methods = resolve_methods(spec, cfg.method)
    mc = _mc_config(cfg, spec) if "qmc" in methods.values() else None
    if mc is not None:
        jobs = 1  # the Monte Carlo threads over walkers itself

    def one(g):
        try:
            return sweep_point(spec.with_g(g), methods, mc), None
        except CondQPTError as exc:
            return None, exc

    if jobs <= 1:
        results = []
        for g in grid:
            results.append(one(g))
            if results[-1][1] is not None:
                break
    else:
        with ThreadPoolExecutor(jobs) as pool:
            results = list(pool.map(one, grid))
    rows = []
    for g, (row, exc) in zip(grid, results):
        if exc is not None:
            raise type(exc)(f"{spec.label()} at g={g:.12g}: {exc}") from exc
        rows.append(row)
    return rows


def run_sweep(cfg: RunConfig, sections: dict, jobs: int = 1, write: bool = True) -> dict:
    """Run every size of the config; returns the manifest (files written when ``write``)."""
    if cfg.sweep is None:
        raise ConfigError("missing [sweep] section", "sweep")
    t0 = time.time()
    specs = [None] if cfg.model.thermodynamic else cfg.model.models(0.0)
    outputs, results = [], []
    for spec in specs:
        rows = _sweep_rows(cfg, spec, jobs)
        n, n_p = (None, None) if spec is None else (spec.n_sites, spec.n_eff_particles)
        stem = output.file_stem(cfg.model.family, n, n_p)
        if cfg.output_format == "csv":
            name, text = stem + ".csv", output.rows_to_csv(rows)
        else:
            name, text = stem + ".json", output.rows_to_json(rows)
        path = output.write_text(cfg.output_path, name, text) if write else name
        results.append(rows)
        outputs.append({"file": path, "sha256": output.sha256(text), "N": n, "Np": n_p,
                        "provenance": output.provenance(rows)})
    manifest = {
        "artifact": "condqpt",
        "version": __version__,
        "command": "sweep",
        "config": sections,
        "resolved": cfg.to_dict(),
        "seeds": {"mc": cfg.mc.seed} if "qmc" in cfg.method.values() else {},
        "started": time.strftime("%Y-%m-%dT%H:%M:%S%z", time.localtime(t0)),
        "wall_clock_s": time.time() - t0,
        "outputs": outputs,
    }
    if write:
        output.write_text(cfg.output_path, f"{cfg.model.family}_manifest.json",
                          json.dumps(manifest, indent=1, default=str) + "\n")
    manifest["rows"] = results
    return manifest


def cmd_sweep(args) -> int:
    if args.replay:
        with open(args.replay, encoding="utf-8") as fh:
            sections = json.load(fh)["config"]
        if args.output is not None:
            sections.setdefault("output", {})["path"] = args.output
    else:
        sections = merged_sections(args)
    cfg = config_from_sections(sections)
    manifest = run_sweep(cfg, sections, args.jobs)
    for out in manifest["outputs"]:
        print(out["file"])
    return 0


# ----------------------------------------------------------------------------- locate

def cmd_locate(args) -> int:
    if args.csv:
        batches = [(path, output.read_csv(path)) for path in args.csv]
    else:
        sections = merged_sections(args)
        cfg = config_from_sections(sections)
        manifest = run_sweep(cfg, sections, args.jobs, write=not args.no_write)
        batches = [(o["file"], rows) for o, rows in zip(manifest["outputs"], manifest["rows"])]
    results = []
    for source, rows in batches:
        diag = args.diagnostic
        if diag is None:
            diag = "delta0" if all(r.delta0 is not None for r in rows) else "delta1"
        est = locate_critical(rows, diag)
        rec = {"source": source, "N": rows[0].n_sites if rows else None, "diagnostic": diag}
        rec.update(est.to_dict())
        results.append(rec)
    print(json.dumps(results[0] if len(results) == 1 else results, indent=1))
    return 0


# ----------------------------------------------------------------------------- qmc-trace

def cmd_qmc_trace(args) -> int:
    sections = merged_sections(args)
    sections.setdefault("method", {}).setdefault("solver", "qmc")
    cfg = config_from_sections(sections)
    specs = cfg.model.models(args.g)
    if len(specs) != 1:
        raise ConfigError("qmc-trace takes a single size", "model.N")
    spec = specs[0]
    mc = replace(_mc_config(cfg, spec), restriction=args.restriction)
    split = None if args.restriction == "full" else split_space(spec)
    t0 = time.time()
    est = run_projector_mc(spec, split, mc)
    stem = output.file_stem(spec.family.value, spec.n_sites, spec.n_eff_particles)
    name = f"{stem}_g{args.g:.12g}_{args.restriction}_trace.csv"
    text = trace_csv(est)
    path = output.write_text(cfg.output_path, name, text)
    summary = {
        "trace": path, "sha256": output.sha256(text), "version": __version__,
        "energy": est.energy, "std_error": est.std_error, "n_blocks_used": est.n_blocks_used,
        "mean_jumps_per_unit_time": est.mean_jumps_per_unit_time,
        "reference_energy": est.reference_energy, "backend": est.backend,
        "config": asdict(mc), "seed": mc.seed, "wall_clock_s": time.time() - t0,
    }
    output.write_text(cfg.output_path, name[:-4] + ".json", json.dumps(summary, indent=1) + "\n")
    print(json.dumps(summary, indent=1))
    return 0


# ----------------------------------------------------------------------------- defaults

def cmd_defaults(args) -> int:
    if args.family is not None:
        family = FAMILY_ALIASES.get(args.family, args.family)
        if args.N is None:
            raise ConfigError("give --N with --family", "model.N")
        try:
            n = int(args.N)
        except ValueError:
            raise ConfigError(f"expected an integer, got {args.N!r}", "model.N") from None
        mc = table_defaults(family, n)
        print(json.dumps({"family": family, "N": n, "dt": mc.dt, "blocks": mc.blocks,
                          "walkers": mc.walkers, "burn_in_fraction": mc.burn_in_fraction}, indent=1))
        return 0
    print("table,N,dt,blocks")
    for name, table in (("impurity", TABLE_IMPURITY), ("interacting", TABLE_INTERACTING)):
        for n, (dt, blocks) in table.items():
            print(f"{name},{n},{dt},{blocks}")
    return 0


# ----------------------------------------------------------------------------- entry

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="condqpt", description="Condensation diagnostics for quantum phase transitions.")
    parser.add_argument("--version", action="version", version=f"condqpt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="sizes of the condensed and normal subspaces")
    _add_config_flags(p, ("model",))
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("sweep", help="energies and gap diagnostics along g, one CSV per size")
    _add_config_flags(p, ("model", "sweep", "method", "mc", "output"))
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep rows (deterministic solvers)")
    p.add_argument("--replay", metavar="MANIFEST", help="re-run the configuration stored in a manifest")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("locate", help="critical coupling from sweep CSVs or an inline sweep")
    _add_config_flags(p, ("model", "sweep", "method", "mc", "output"))
    p.add_argument("--csv", nargs="+", help="sweep CSV files to analyse")
    p.add_argument("--diagnostic", choices=("delta0", "delta1"))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-write", action="store_true", help="do not write the inline sweep CSVs")
    p.set_defaults(func=cmd_locate)

    p = sub.add_parser("qmc-trace", help="per-block Monte Carlo diagnostics at one coupling")
    _add_config_flags(p, ("model", "mc", "output"))
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--restriction", choices=("full", "cond", "norm"), default="full")
    p.set_defaults(func=cmd_qmc_trace)

    p = sub.add_parser("defaults", help="tabulated Monte Carlo parameters")
    p.add_argument("--family")
    p.add_argument("--N")
    p.set_defaults(func=cmd_defaults)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CondQPTError as exc:
        print(f"condqpt {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        if args.command == "sweep" and getattr(args, "replay", None):
            print(f"condqpt sweep: error: cannot replay {args.replay}: {exc}", file=sys.stderr)
            return ConfigError.exit_code
        raise
