"""Schema-checked readers for the simulator's CSV artifacts.

Each reader validates the exact header line and refuses empty or ragged
data, so a figure script fed the wrong file fails at the read boundary
with a message naming both schemas.
"""

from dataclasses import dataclass

import numpy as np

TRAJECTORY_HEADER = "step,t,cell,x,X,upsilon_mass,gamma_mass"
GAPS_HEADER = "step,t,gap_lower,gap_upper"
HITTING_HEADER = ("theta,n_paths,n_hits,p_hat,ci_low,ci_high,"
                  "eta,T,seed,config_hash")


class SchemaError(Exception):
    """Input file is missing, empty, or not the documented CSV schema."""


def _read_table(path, expected_header: str, numeric_cols: int) -> np.ndarray:
    try:
        with open(path, newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise SchemaError(f"cannot read {path!r}: {exc}")
    if not lines:
        raise SchemaError(f"{path!r} is empty")
    if lines[0] != expected_header:
        raise SchemaError(f"{path!r} header is {lines[0]!r}, "
                          f"expected {expected_header!r}")
    body = [ln for ln in lines[1:] if ln]
    if not body:
        raise SchemaError(f"{path!r} has a header but no data rows")
    rows = np.empty((len(body), numeric_cols))
    for i, line in enumerate(body):
        parts = line.split(",")
        if len(parts) < numeric_cols:
            raise SchemaError(f"{path!r} row {i + 2}: expected at least "
                              f"{numeric_cols} columns, got {len(parts)}")
        try:
            rows[i] = [float(p) for p in parts[:numeric_cols]]
        except ValueError as exc:
            raise SchemaError(f"{path!r} row {i + 2}: {exc}")
    return rows


@dataclass
class TrajectoryGrid:
    t: np.ndarray        # (n_steps,)
    x: np.ndarray        # (n_cells,)
    X: np.ndarray        # (n_steps, n_cells)
    upsilon: np.ndarray  # same shape, lower-wall reflection mass
    gamma: np.ndarray    # same shape, upper-wall reflection mass


def read_trajectory(path) -> TrajectoryGrid:
    rows = _read_table(path, TRAJECTORY_HEADER, 7)
    steps = rows[:, 0].astype(int)
    cells = rows[:, 2].astype(int)
    n_steps, n_cells = steps.max() + 1, cells.max() + 1
    if len(rows) != n_steps * n_cells:
        raise SchemaError(f"{path!r}: {len(rows)} rows do not fill a "
                          f"{n_steps} x {n_cells} step/cell grid")
    t = np.zeros(n_steps)
    x = np.zeros(n_cells)
    X = np.zeros((n_steps, n_cells))
    upsilon = np.zeros((n_steps, n_cells))
    gamma = np.zeros((n_steps, n_cells))
    t[steps] = rows[:, 1]
    x[cells] = rows[:, 3]
    X[steps, cells] = rows[:, 4]
    upsilon[steps, cells] = rows[:, 5]
    gamma[steps, cells] = rows[:, 6]
    return TrajectoryGrid(t, x, X, upsilon, gamma)


@dataclass
class GapSeries:
    t: np.ndarray
    gap_lower: np.ndarray
    gap_upper: np.ndarray


def read_gaps(path) -> GapSeries:
    rows = _read_table(path, GAPS_HEADER, 4)
    return GapSeries(rows[:, 1], rows[:, 2], rows[:, 3])


@dataclass
class HittingCurve:
    theta: np.ndarray
    p_hat: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray


def read_hitting(path) -> HittingCurve:
    # trailing columns (eta, T, seed, hash) are run provenance, not axes
    rows = _read_table(path, HITTING_HEADER, 6)
    order = np.argsort(rows[:, 0])
    rows = rows[order]
    return HittingCurve(rows[:, 0], rows[:, 3], rows[:, 4], rows[:, 5])
