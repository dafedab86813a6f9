"""CSV and JSON writers.

CSV: comma separated, ``\\n`` line endings, UTF-8, floats with 17 significant
digits so every double round-trips exactly.
"""
from __future__ import annotations

import dataclasses
import io
import json
import math
from enum import Enum
from pathlib import Path

import numpy as np

from .diagnostics import P_series
from .integrator import Trajectory

__all__ = ["TRAJECTORY_HEADER", "fmt", "to_jsonable", "trajectory_csv", "write_text", "xy_csv"]

TRAJECTORY_HEADER = ("r", "u", "up", "w", "rho", "E_resid", "P")


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _csv(header, columns) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*columns):
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def trajectory_csv(traj: Trajectory) -> str:
    """One line per node with the columns of :data:`TRAJECTORY_HEADER`."""
    cols = [traj.r, traj.u, traj.up, traj.w, traj.rho, traj.E_resid, P_series(traj)]
    return _csv(TRAJECTORY_HEADER, cols)


def xy_csv(header: tuple[str, str], x, y) -> str:
    return _csv(header, [np.asarray(x, float), np.asarray(y, float)])


def to_jsonable(obj):
    """Plain JSON structure for dataclasses, enums and numpy values.

    Non-finite floats become ``null`` so the output is strict JSON.
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_text(text: str, target: str | None) -> int:
    """Write to ``target`` (``None`` or ``"-"`` means stdout); return bytes written."""
    data = text.encode("utf-8")
    if target in (None, "-"):
        import sys

        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(target).write_bytes(data)
    return len(data)
