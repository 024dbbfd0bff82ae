"""CSV and JSON artifacts of a sweep, and the run manifest."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from typing import Iterable, Optional, Sequence

from ..analysis.sweep import SweepRow
from ..errors import ConfigError

CSV_COLUMNS = (
    "g", "N", "Np", "E_over_Np", "E_cond_over_Np", "E_norm_over_Np",
    "delta", "delta0", "delta1", "E_solver", "Enorm_solver", "mc_stderr",
)
INF = "inf"


def fmt_float(x: Optional[float]) -> str:
    return "" if x is None else "%.12g" % (x + 0.0)  # folds -0.0


def fmt_int(n: Optional[int]) -> str:
    return INF if n is None else str(int(n))


def row_fields(row: SweepRow) -> list[str]:
    return [
        fmt_float(row.g), fmt_int(row.n_sites), fmt_int(row.n_particles),
        fmt_float(row.e_over_np), fmt_float(row.e_cond_over_np), fmt_float(row.e_norm_over_np),
        fmt_float(row.delta), fmt_float(row.delta0), fmt_float(row.delta1),
        row.e_solver, row.enorm_solver, fmt_float(row.mc_stderr),
    ]


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row_fields(row))
    return buf.getvalue()


def _opt_float(text: str) -> Optional[float]:
    return None if text == "" else float(text)


def _opt_int(text: str) -> Optional[int]:
    return None if text == INF else int(text)


def csv_to_rows(text: str, source: str = "<csv>") -> list[SweepRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_COLUMNS:
        raise ConfigError(f"header must be {','.join(CSV_COLUMNS)}", source)
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if len(rec) != len(CSV_COLUMNS):
            raise ConfigError(f"line {lineno}: expected {len(CSV_COLUMNS)} fields, got {len(rec)}", source)
        try:
            rows.append(SweepRow(
                g=float(rec[0]), n_sites=_opt_int(rec[1]), n_particles=_opt_int(rec[2]),
                e_over_np=float(rec[3]), e_cond_over_np=float(rec[4]), e_norm_over_np=_opt_float(rec[5]),
                delta=_opt_float(rec[6]), delta0=_opt_float(rec[7]), delta1=float(rec[8]),
                e_solver=rec[9], enorm_solver=rec[10], mc_stderr=_opt_float(rec[11]),
            ))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}", source) from None
    return rows


def read_csv(path: str) -> list[SweepRow]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return csv_to_rows(fh.read(), path)
    except OSError as exc:
        raise ConfigError(f"cannot read: {exc.strerror}", path) from None


def rows_to_json(rows: Sequence[SweepRow]) -> str:
    out = [dict(zip(CSV_COLUMNS, (
        r.g, r.n_sites, r.n_particles, r.e_over_np, r.e_cond_over_np, r.e_norm_over_np,
        r.delta, r.delta0, r.delta1, r.e_solver, r.enorm_solver, r.mc_stderr,
    ))) for r in rows]
    return json.dumps(out, indent=1) + "\n"


def file_stem(family: str, n_sites: Optional[int], n_particles: Optional[int]) -> str:
    return f"{family}_N{fmt_int(n_sites)}_Np{fmt_int(n_particles)}"


def write_text(directory: str, name: str, text: str) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def provenance(rows: Sequence[SweepRow]) -> list[dict]:
    return [
        {"g": r.g, "E": r.e_solver, "E_cond": r.econd_solver, "E_norm": r.enorm_solver or None,
         "flags": list(r.flags)}
        for r in rows
    ]
