"""Manifest and CSV serialization."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version

import numpy as np


def package_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0.0.0"


@dataclass
class Report:
    command: str
    config: dict
    summary: dict
    columns: list
    rows: list = field(default_factory=list)
    wall_time: float = 0.0
    status: str = "ok"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def write_csv(path, columns, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"row has {len(row)} fields, header has {len(columns)}")
            wr.writerow([_fmt(v) for v in row])


def emit_report(report: Report, out_dir) -> dict:
    """Write manifest.json and data.csv under ``out_dir``; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        "command": report.command,
        "status": report.status,
        "version": package_version(),
        "wall_time_s": report.wall_time,
        "config": report.config,
        "summary": report.summary,
        "columns": list(report.columns),
    }
    mpath = os.path.join(out_dir, "manifest.json")
    with open(mpath, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")
    dpath = os.path.join(out_dir, "data.csv")
    write_csv(dpath, report.columns, report.rows)
    return {"manifest": mpath, "data": dpath}


def read_report(out_dir):
    """(manifest dict, header list, rows as lists of strings)."""
    with open(os.path.join(out_dir, "manifest.json"), encoding="utf-8") as fh:
        manifest = json.load(fh)
    with open(os.path.join(out_dir, "data.csv"), encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return manifest, rows[0], rows[1:]
