"""Deterministic report writing: canonical JSON and flat CSV at 17 significant digits."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .radial import Dimension
from .textio import atomic_write_text, fmt

SCHEMA_VERSION = "1.0"


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return fmt(x)


def _encode(obj, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{" + pad + ("," + pad).join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, bool, np.integer, np.floating, np.bool_)) or v is None for v in seq):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in seq) + "]"
        return "[" + pad + ("," + pad).join(_encode(v, indent, level + 1) for v in seq) + end + "]"
    if hasattr(obj, "to_dict"):
        return _encode(obj.to_dict(), indent, level)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def canonical_json(obj, indent: int = 1) -> str:
    """Sorted keys, fixed float format; identical input gives identical bytes."""
    return _encode(obj, indent, 0) + "\n"


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def envelope(subcommand: str, config: dict, dim: Dimension, results) -> dict:
    table = dim.constant_table()
    return {
        "schema_version": SCHEMA_VERSION,
        "subcommand": subcommand,
        "config_sha256": config_hash(config),
        "config": config,
        "constants": {"N": table["N"], "gamma_N": table["gamma_N"], "omega": table["omega"],
                      "ball_volume": table["ball_volume"], "beta_N": table["beta_N"]},
        "results": results,
    }


def rows_to_csv(rows: Sequence[dict], columns: Sequence[str] | None = None, header_comment: str | None = None) -> str:
    if columns is None:
        columns = []
        for r in rows:
            columns.extend(k for k in r if k not in columns)
    buf = io.StringIO()
    if header_comment:
        for line in header_comment.splitlines():
            buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_csv_cell(r.get(c, "")) for c in columns])
    return buf.getvalue()


def _csv_cell(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return fmt(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return x


def write_report(out_dir, stem: str, report: dict, rows: Sequence[dict] | None = None,
                 columns: Sequence[str] | None = None) -> list[Path]:
    """Write ``<stem>.json`` and, when rows are given, ``<stem>.csv``; both atomically.

    The JSON report carries the config hash and constant table; the CSV is a
    plain header-plus-rows series so that any CSV reader accepts it.
    """
    out_dir = Path(out_dir)
    paths = [out_dir / f"{stem}.json"]
    atomic_write_text(paths[0], canonical_json(report))
    if rows is not None:
        paths.append(out_dir / f"{stem}.csv")
        atomic_write_text(paths[1], rows_to_csv(rows, columns))
    return paths
