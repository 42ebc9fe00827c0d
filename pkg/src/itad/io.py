"""CSV and manifest output.

Numbers are written with 17 significant digits (``%.17g``), '.' decimal
separator and '\\n' line endings, so identical arrays give identical bytes.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
import platform

import numpy as np

FLOAT_FMT = "%.17g"
INT_FMT = "%d"


def _fmt(col):
    return INT_FMT if np.issubdtype(np.asarray(col).dtype, np.integer) else FLOAT_FMT


def write_csv(path, header, columns):
    """Write equal-length columns under a mandatory header row."""
    cols = [np.asarray(c) for c in columns]
    if len(cols) != len(header):
        raise ValueError("header and column count differ")
    n = cols[0].shape[0] if cols else 0
    if any(c.shape[0] != n for c in cols):
        raise ValueError("columns differ in length")
    fmts = [_fmt(c) for c in cols]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(f % v for f, v in zip(fmts, row)) + "\n")
    return path


def write_table(path, header, rows):
    """Row-oriented variant of :func:`write_csv`; values may be str."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for v in row:
                if isinstance(v, (bool, np.bool_)):
                    cells.append("true" if v else "false")
                elif isinstance(v, (int, np.integer)):
                    cells.append(INT_FMT % v)
                elif isinstance(v, (float, np.floating)):
                    cells.append(FLOAT_FMT % v)
                else:
                    cells.append("" if v is None else str(v))
            fh.write(",".join(cells) + "\n")
    return path


def read_csv(path):
    """Header and string rows of a CSV file."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    return rows[0], rows[1:]


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False, default=_jsonable)
        fh.write("\n")
    return path


def _jsonable(v):
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not JSON serializable: {type(v).__name__}")


def write_manifest(directory, command, config, seed, outputs, wall_time, results=None):
    """Record everything needed to re-run a command exactly."""
    from . import __version__
    from ._backend import BACKEND

    manifest = {
        "manifest_version": 1,
        "command": command,
        "version": __version__,
        "backend": BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "seed": seed,
        "config": config,
        "wall_time_s": wall_time,
        "outputs": {os.path.basename(p): sha256(p) for p in outputs},
        "results": results or {},
    }
    return write_json(os.path.join(directory, "manifest.json"), manifest)
