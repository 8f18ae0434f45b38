"""CSV and JSON writers.

Floats are written with repr so reruns of the same configuration produce
byte-identical files.  Every writer accepts a plain path; a name ending in
.gz (or gzip_output=True) writes through gzip with fixed mtime 0 so the
bytes stay reproducible too.
"""

from __future__ import annotations

import gzip
import hashlib
import json

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "config_hash",
    "save_trajectory_csv",
    "save_gaps_csv",
    "save_obstacle_csv",
    "save_ledger_csv",
    "write_summary_json",
]


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def config_hash(config: dict) -> str:
    """First 12 hex digits of the sha256 of the sorted-keys JSON form."""
    blob = json.dumps(config, sort_keys=True, default=_jsonable)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def _write_bytes(pathname, data: bytes, gzip_output: bool):
    name = str(pathname)
    if gzip_output or name.endswith(".gz"):
        # gzip.compress writes no filename field, so equal content gives
        # equal bytes whatever the file is called
        data = gzip.compress(data, mtime=0)
    with open(name, "wb") as fh:
        fh.write(data)


def _write_lines(pathname, lines, gzip_output):
    _write_bytes(pathname, ("\n".join(lines) + "\n").encode("utf-8"),
                 gzip_output)


def save_trajectory_csv(path, pathname, gzip_output: bool = False) -> None:
    """Long-format trajectory: one row per (step, cell) with the state and
    both ledger masses.  Columns: step,t,cell,x,X,upsilon_mass,gamma_mass."""
    grid = path.grid
    up, down = path.ledger.upsilon_mass, path.ledger.gamma_mass
    lines = ["step,t,cell,x,X,upsilon_mass,gamma_mass"]
    for n in range(grid.nt + 1):
        t = repr(n * grid.dt)
        for j in range(grid.n_cells):
            lines.append(f"{n},{t},{j},{float(grid.x_coords[j])!r},"
                         f"{float(path.X[n, j])!r},{float(up[n, j])!r},"
                         f"{float(down[n, j])!r}")
    _write_lines(pathname, lines, gzip_output)


def save_gaps_csv(path, pathname, gzip_output: bool = False) -> None:
    """Per-step minimum wall distances.  Columns: step,t,gap_lower,gap_upper."""
    grid = path.grid
    gl = np.min(path.X - path.walls.lambda1, axis=1)
    gu = np.min(path.walls.lambda2 - path.X, axis=1)
    lines = ["step,t,gap_lower,gap_upper"]
    for n in range(grid.nt + 1):
        lines.append(f"{n},{n * grid.dt!r},{float(gl[n])!r},{float(gu[n])!r}")
    _write_lines(pathname, lines, gzip_output)


def save_obstacle_csv(xi, grid, pathname, gzip_output: bool = False) -> None:
    """Obstacle component on the full lattice.  Columns: step,t,cell,x,xi."""
    xi = np.asarray(xi)
    if xi.shape != (grid.nt + 1, grid.n_cells):
        raise ConfigurationError(
            f"xi has shape {xi.shape}, expected ({grid.nt + 1}, {grid.n_cells})")
    lines = ["step,t,cell,x,xi"]
    for n in range(grid.nt + 1):
        t = repr(n * grid.dt)
        for j in range(grid.n_cells):
            lines.append(f"{n},{t},{j},{float(grid.x_coords[j])!r},"
                         f"{float(xi[n, j])!r}")
    _write_lines(pathname, lines, gzip_output)


def save_ledger_csv(ledger, grid, pathname, gzip_output: bool = False) -> None:
    """Reflection masses alone.  Columns: step,t,cell,x,upsilon_mass,gamma_mass."""
    up, down = ledger.upsilon_mass, ledger.gamma_mass
    if up.shape != (grid.nt + 1, grid.n_cells):
        raise ConfigurationError(
            f"ledger has shape {up.shape}, expected ({grid.nt + 1}, {grid.n_cells})")
    lines = ["step,t,cell,x,upsilon_mass,gamma_mass"]
    for n in range(grid.nt + 1):
        t = repr(n * grid.dt)
        for j in range(grid.n_cells):
            lines.append(f"{n},{t},{j},{float(grid.x_coords[j])!r},"
                         f"{float(up[n, j])!r},{float(down[n, j])!r}")
    _write_lines(pathname, lines, gzip_output)


def write_summary_json(config: dict, results: dict, pathname,
                       gzip_output: bool = False) -> None:
    """Run summary: the full config echo, its hash, and scalar results."""
    doc = {"config": config, "config_hash": config_hash(config),
           "results": results}
    text = json.dumps(doc, sort_keys=True, indent=2, default=_jsonable)
    _write_bytes(pathname, (text + "\n").encode("utf-8"), gzip_output)
