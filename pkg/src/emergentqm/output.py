"""Deterministic CSV / JSON serialisation of result tables."""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list = field(default_factory=list)
    seed: int | None = None


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return "%.17g" % v
    if v is None:
        return ""
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if not math.isfinite(v) else v
    if isinstance(v, dict):
        return {str(k): _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def dumps_json(payload) -> bytes:
    return (json.dumps(_json_value(payload), sort_keys=True, indent=2, allow_nan=False)
            + "\n").encode("utf-8")


def emit_output(result: Table, fmt: str = "csv") -> bytes:
    """Serialise a table.  CSV carries a ``# seed=N`` line first when a seed is set."""
    if fmt == "csv":
        buf = io.StringIO()
        if result.seed is not None:
            buf.write(f"# seed={result.seed}\n")
        buf.write(",".join(result.columns) + "\n")
        for row in result.rows:
            buf.write(",".join(_cell(v) for v in row) + "\n")
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        payload = {"columns": list(result.columns), "rows": [list(r) for r in result.rows]}
        if result.seed is not None:
            payload["seed"] = result.seed
        return dumps_json(payload)
    raise ValueError(f"unknown format {fmt!r}")


def read_csv(data: bytes) -> Table:
    """Parse bytes written by emit_output(fmt="csv"); numeric cells become floats."""
    seed = None
    lines = data.decode("utf-8").splitlines()
    if lines and lines[0].startswith("# seed="):
        seed = int(lines[0][len("# seed="):])
        lines = lines[1:]
    columns = tuple(lines[0].split(","))
    rows = []
    for line in lines[1:]:
        row = []
        for cell in line.split(","):
            try:
                row.append(float(cell))
            except ValueError:
                row.append(cell)
        rows.append(row)
    return Table(columns, rows, seed)
