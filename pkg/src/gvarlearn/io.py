"""CSV series and JSON model files.

CSV: one row per time step in increasing time order, one column per variable,
optional header row, '.' as decimal separator.

Model JSON (also used for simulated ground truth)::

    {"d", "k", "gamma", "index_base": 0,
     "temporal_edges": [[lag, src, dst], ...],
     "contemporaneous_edges": [[a, b], ...],
     "A": [k row-major d x d matrices], "Omega": row-major d x d,
     "diagnostics": {"objective_per_k", "loglik_trajectory", "timings_ms", ...}}

Variable indices are 0-based, lags 1-based. Floats are written with Python's
shortest round-trip repr, so reloading reproduces them bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .model import GvarModel, GvarStructure, TimeSeries


class InputError(ValueError):
    """Malformed or unreadable input file."""


def read_csv(path) -> TimeSeries:
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise InputError(f"{path} is not valid UTF-8") from None
    if not rows:
        raise InputError(f"{path} is empty")

    names = None
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise InputError(f"{path} has a header but no data rows")

    width = len(rows[0]) if names is None else len(names)
    values = np.empty((len(rows), width))
    for r, row in enumerate(rows):
        line = r + (2 if names is not None else 1)
        if len(row) != width:
            raise InputError(f"{path}:{line}: expected {width} columns, found {len(row)}")
        for c, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise InputError(f"{path}:{line}: column {_col_label(names, c)} is not a number: {cell!r}") from None
            if not math.isfinite(v):
                raise InputError(f"{path}:{line}: column {_col_label(names, c)} is not finite")
            values[r, c] = v
    try:
        return TimeSeries(values, names)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def _col_label(names, c):
    return repr(names[c]) if names else str(c)


def write_csv(path, series: TimeSeries) -> None:
    names = series.names or tuple(f"x{i}" for i in range(series.d))
    lines = [",".join(names)]
    lines += [",".join(repr(float(v)) for v in row) for row in series.values]
    _atomic_write(path, "\n".join(lines) + "\n")


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _matrix(a) -> list:
    return [[float(x) for x in row] for row in np.asarray(a)]


def model_to_dict(
    structure: GvarStructure,
    model: GvarModel | None = None,
    gamma: float | None = None,
    diagnostics: dict | None = None,
    **extra,
) -> dict:
    out = {
        "d": structure.d,
        "k": structure.k,
        "gamma": gamma,
        "index_base": 0,
        "temporal_edges": [list(e) for e in sorted(structure.temporal_edges)],
        "contemporaneous_edges": [list(e) for e in sorted(structure.contemporaneous_edges)],
        "A": [_matrix(a) for a in model.lag_matrices] if model is not None else None,
        "Omega": _matrix(model.precision) if model is not None else None,
        "diagnostics": diagnostics or {},
    }
    out.update(extra)
    return out


def write_json(path, payload: dict) -> None:
    _atomic_write(path, json.dumps(payload, indent=1, allow_nan=False) + "\n")


def read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None
    for key in ("d", "k", "temporal_edges", "contemporaneous_edges"):
        if key not in data:
            raise InputError(f"{path} is missing required key {key!r}")
    return data


def structure_from_dict(data: dict) -> GvarStructure:
    try:
        return GvarStructure(
            int(data["d"]),
            int(data["k"]),
            frozenset(tuple(e) for e in data["temporal_edges"]),
            frozenset(tuple(e) for e in data["contemporaneous_edges"]),
        )
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid structure: {exc}") from None


def model_from_dict(data: dict) -> GvarModel | None:
    if data.get("A") is None or data.get("Omega") is None:
        return None
    try:
        return GvarModel(tuple(np.array(a, dtype=float) for a in data["A"]), np.array(data["Omega"], dtype=float))
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid model parameters: {exc}") from None
