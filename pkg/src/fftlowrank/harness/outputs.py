"""CSV and JSON writers with 17-significant-digit floats (bit-exact round trip)."""
from __future__ import annotations

import csv
import io
import json
import math
import os

ITERATION_COLUMNS = ("iter", "residual_norm", "omega", "rank_max", "elapsed_s")


def fmt_float(x):
    text = "%.17g" % x
    if all(c not in text for c in ".en"):
        text += ".0"
    return text


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or (isinstance(obj, float) and not math.isfinite(obj)):
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if hasattr(obj, "item") and not isinstance(obj, (list, tuple, dict, str)):
        return _encode(obj.item(), indent, level)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def to_json(obj, indent=2):
    """JSON text where every float carries 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return fmt_float(v)
    if isinstance(v, (list, tuple)):
        return " ".join(_cell(x) for x in v)
    return str(v)


def csv_text(rows, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def iteration_rows(result):
    timing = result.config.timing
    rows = []
    for rec in result.report.iterations:
        rows.append({"iter": rec.index, "residual_norm": float(rec.residual_norm),
                     "omega": float(rec.omega), "rank_max": max(rec.ranks, default=0),
                     "elapsed_s": float(rec.elapsed_s) if timing else 0.0})
    return rows


def run_name(result, index):
    c = result.config
    if c.label:
        return c.label
    rank = c.rank if c.rank is not None else (c.rank_schedule[-1] if c.rank_schedule else 0)
    return f"{index:03d}_{c.dim}d_N{c.grid_n}_{c.scheme}_{c.solver}_{c.format}_r{rank}"


def sort_sweep(rows):
    return sorted(rows, key=lambda r: (r.get("N", 0), r.get("rank", 0)))


def write_outputs(results, out_dir, family=None, sweep_rows=None, sweep_columns=None,
                  series=None):
    """Write per-run ``iterations.csv`` and ``summary.json`` plus optional sweep files.

    ``sweep_rows`` (dicts) go to ``<family>_sweep.csv`` sorted by (N, rank);
    ``series`` maps a file stem to ``(rows, columns)`` for extra plot data.
    Returns the list of written paths.
    """
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out_dir}: {exc.strerror or exc}") from exc
    written = []
    for i, res in enumerate(results):
        run_dir = os.path.join(out_dir, run_name(res, i))
        try:
            os.makedirs(run_dir, exist_ok=True)
        except OSError as exc:
            raise OSError(f"cannot create {run_dir}: {exc.strerror or exc}") from exc
        p = os.path.join(run_dir, "iterations.csv")
        _write(p, csv_text(iteration_rows(res), ITERATION_COLUMNS))
        written.append(p)
        p = os.path.join(run_dir, "summary.json")
        _write(p, to_json(res.summary()))
        written.append(p)
    stem = family or "sweep"
    if sweep_rows:
        columns = sweep_columns or list(sweep_rows[0].keys())
        p = os.path.join(out_dir, f"{stem}_sweep.csv")
        _write(p, csv_text(sort_sweep(sweep_rows), columns))
        written.append(p)
    for name, (rows, columns) in (series or {}).items():
        p = os.path.join(out_dir, f"{name}.csv")
        _write(p, csv_text(rows, columns))
        written.append(p)
    return written


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
