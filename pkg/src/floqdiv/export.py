"""CSV tables and Wigner-field files with JSON metadata sidecars."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


def format_value(v):
    """Shortest round-trip text for numbers; everything else via ``str``."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def export_table(rows, path, columns):
    """Write ``rows`` under a header of ``columns``.

    Rows may be sequences (positional) or mappings keyed by column name.
    An empty ``rows`` produces a header-only file.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            if isinstance(row, dict):
                row = [row[c] for c in columns]
            elif len(row) != len(columns):
                raise ValueError(f"row has {len(row)} values for {len(columns)} columns")
            w.writerow([format_value(v) for v in row])
    return path


def read_table(path):
    """Read back a table written by :func:`export_table` as ``(columns, float array)``."""
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        columns = next(r)
        data = [[float(x) for x in row] for row in r]
    arr = np.array(data, dtype=float).reshape(len(data), len(columns))
    return columns, arr


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def write_json(obj, path):
    """Deterministic JSON (sorted keys, fixed indentation, trailing newline)."""
    text = json.dumps(_jsonable(obj), sort_keys=True, indent=2)
    Path(path).write_text(text + "\n")
    return Path(path)


def sidecar_path(path):
    p = Path(path)
    return p.with_name(p.name + ".meta.json")


def export_field(field, path, time=None, config_hash=None, extra=None):
    """Write a Wigner field as ``Q,P,W`` rows plus ``<path>.meta.json``.

    ``time`` is the simulation time of the state (units of the bath period).
    """
    g = field.grid
    Q, P = np.meshgrid(g.q, g.p, indexing="ij")
    rows = zip(Q.ravel(), P.ravel(), field.values.ravel())
    export_table(rows, path, ["Q", "P", "W"])
    meta = {
        "grid": {
            "q_min": g.q_min, "q_max": g.q_max, "n_q": g.n_q,
            "p_min": g.p_min, "p_max": g.p_max, "n_p": g.n_p,
        },
        "time": time,
        "config_hash": config_hash,
        "min": float(field.values.min()),
        "max": float(field.values.max()),
    }
    if extra:
        meta.update(extra)
    write_json(meta, sidecar_path(path))
    return Path(path)
