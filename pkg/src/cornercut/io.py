"""File formats: piecewise-linear net files, CSV geometry, JSON reports.

Floats are written with 17 significant digits so that they round-trip.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .exceptions import ConfigError
from .nets import GridT, NetOfFunctions
from .transfinite import UFunction


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def load_net_file(path) -> NetOfFunctions:
    """Read a net of piecewise-linear u-functions.

    The file is JSON with ``s_knots``, ``t_knots`` and lists ``phi`` (one per
    t-knot, sampled along s) and ``psi`` (one per s-knot, sampled along t);
    each entry is ``{"x": [...], "v": [...]}``.
    """
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"net file {path}: {exc}") from exc
    try:
        grid = GridT(data["s_knots"], data["t_knots"])
        phi = [UFunction.piecewise_linear(e["x"], e["v"]) for e in data["phi"]]
        psi = [UFunction.piecewise_linear(e["x"], e["v"]) for e in data["psi"]]
        return NetOfFunctions(grid, phi, psi)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"net file {path}: {exc}") from exc


def write_net_file(net: NetOfFunctions, path, samples_per_cell: int = 16):
    """Write ``net`` in the piecewise-linear net file format, sampling each u-function."""
    g = net.grid

    def sampled(f, knots):
        frac = np.linspace(0.0, 1.0, samples_per_cell + 1)[:-1]
        x = np.append((knots[:-1, None] + np.diff(knots)[:, None] * frac).reshape(-1), knots[-1])
        return {"x": x.tolist(), "v": np.asarray(f(x)).tolist()}

    data = {
        "s_knots": g.s.tolist(),
        "t_knots": g.t.tolist(),
        "phi": [sampled(f, g.s) for f in net.phi],
        "psi": [sampled(f, g.t) for f in net.psi],
    }
    Path(path).write_text(json.dumps(data))


def _rows_to_csv(header, rows) -> str:
    out = [",".join(header)]
    out.extend(",".join(fmt(v) for v in r) for r in rows)
    return "\n".join(out) + "\n"


def polyline_csv(level) -> str:
    dims = [f"x{d + 1}" for d in range(level.dim)]
    rows = [[level.level, u, *p] for u, p in zip(level.u, level.P)]
    return _rows_to_csv(["level", "u", *dims], rows)


def surface_csv(S, T, V) -> str:
    V = np.asarray(V)
    flatV = V.reshape(S.size, -1)
    cols = ["value"] if flatV.shape[1] == 1 and V.ndim == S.ndim else [
        f"v{d + 1}" for d in range(flatV.shape[1])
    ]
    rows = [[s, t, *v] for s, t, v in zip(S.reshape(-1), T.reshape(-1), flatV)]
    return _rows_to_csv(["s", "t", *cols], rows)


def _jsonable(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def report_json(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=False) + "\n"
