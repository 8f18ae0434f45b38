"""Wall pairs: the two moving barriers the solution is squeezed between.

A WallPair samples both walls (and their heat-operator forcings
f_i = dLambda_i/dt - d2Lambda_i/dx2) on the full space-time lattice.  Walls
come from a small analytic registry or from a tabulated CSV.  Admissibility:

  H0  at the pinned interval endpoints the lower wall is <= 0 and the upper
      wall is >= 0 for all t (so the zero boundary value stays between them);
  H1  strict separation, lower < upper everywhere;
  H2  forcings are finite everywhere;
  H3  the walls do not move in time at the interval endpoints;
  H4  the gap (upper - lower) never shrinks in time.

H1 is always fatal; H4 is fatal unless explicitly overridden; the rest are
reported only.  H0/H3 need endpoint samples, so they are skipped for circle
grids and for tabulated walls without x=0/x=1 rows.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .grids import Grid

__all__ = [
    "WallPair",
    "WallCheck",
    "WallReport",
    "make_walls",
    "wall_registry",
    "validate_walls",
    "load_walls_csv",
    "save_walls_csv",
]


@dataclass(eq=False)
class WallPair:
    """Both walls and their forcings sampled at step endpoints, shape
    (nt+1, n_cells).  endpoint_* arrays (nt+1, 2) carry the x=0 and x=1
    samples on interval grids when the profile can supply them."""

    lambda1: np.ndarray
    lambda2: np.ndarray
    forcing1: np.ndarray
    forcing2: np.ndarray
    provenance: str = "analytic"
    name: str = ""
    params: dict = field(default_factory=dict)
    endpoint_lambda1: np.ndarray | None = None
    endpoint_lambda2: np.ndarray | None = None

    def gap(self) -> np.ndarray:
        return self.lambda2 - self.lambda1


def _fd_forcing(values: np.ndarray, grid: Grid,
                endpoints: np.ndarray | None) -> np.ndarray:
    """Finite-difference dV/dt - d2V/dx2 for tabulated walls (diagnostic use)."""
    dvdt = np.gradient(values, grid.dt, axis=0)
    dx2 = grid.dx * grid.dx
    lap = np.empty_like(values)
    lap[:, 1:-1] = (values[:, 2:] - 2.0 * values[:, 1:-1] + values[:, :-2]) / dx2
    if grid.is_circle():
        lap[:, 0] = (values[:, 1] - 2.0 * values[:, 0] + values[:, -1]) / dx2
        lap[:, -1] = (values[:, 0] - 2.0 * values[:, -1] + values[:, -2]) / dx2
    elif endpoints is not None:
        lap[:, 0] = (values[:, 1] - 2.0 * values[:, 0] + endpoints[:, 0]) / dx2
        lap[:, -1] = (endpoints[:, 1] - 2.0 * values[:, -1] + values[:, -2]) / dx2
    else:
        # one-sided copy: second difference is locally constant near the edge
        lap[:, 0] = lap[:, 1]
        lap[:, -1] = lap[:, -2]
    return dvdt - lap


def _sample(grid: Grid, fn_x_t):
    t = grid.times[:, None]
    x = grid.x_coords[None, :]
    vals = np.broadcast_to(fn_x_t(x, t), (grid.nt + 1, grid.n_cells)).astype(float)
    if grid.is_circle():
        ends = None
    else:
        xe = np.array([0.0, 1.0])[None, :]
        ends = np.broadcast_to(fn_x_t(xe, t), (grid.nt + 1, 2)).astype(float)
    return vals.copy(), None if ends is None else ends.copy()


def _constant_profile(grid: Grid, lambda1: float = -1.0, lambda2: float = 1.0):
    l1, e1 = _sample(grid, lambda x, t: np.full_like(x + t, lambda1))
    l2, e2 = _sample(grid, lambda x, t: np.full_like(x + t, lambda2))
    z = np.zeros_like(l1)
    return l1, l2, z, z.copy(), e1, e2


def _affine_gap_profile(grid: Grid, lambda1: float = -1.0, lambda2: float = 1.0,
                        rate1: float = 0.0, rate2: float = 0.0):
    """Walls receding affinely in time; rates >= 0 keep the gap nondecreasing."""
    l1, e1 = _sample(grid, lambda x, t: lambda1 - rate1 * t + 0.0 * x)
    l2, e2 = _sample(grid, lambda x, t: lambda2 + rate2 * t + 0.0 * x)
    f1 = np.full_like(l1, -rate1)
    f2 = np.full_like(l2, rate2)
    return l1, l2, f1, f2, e1, e2


def _sinusoid_profile(grid: Grid, lambda1: float = -1.0, lambda2: float = 1.0,
                      amp1: float = 0.2, amp2: float = 0.2, wavenumber: int = 1):
    """Frozen sinusoidal-in-x walls; forcing is minus the second derivative."""
    k = 2.0 * np.pi * wavenumber
    l1, e1 = _sample(grid, lambda x, t: lambda1 + amp1 * np.sin(k * x) + 0.0 * t)
    l2, e2 = _sample(grid, lambda x, t: lambda2 + amp2 * np.sin(k * x) + 0.0 * t)
    f1, _ = _sample(grid, lambda x, t: amp1 * k * k * np.sin(k * x) + 0.0 * t)
    f2, _ = _sample(grid, lambda x, t: amp2 * k * k * np.sin(k * x) + 0.0 * t)
    return l1, l2, f1, f2, e1, e2


_REGISTRY = {
    "constant": _constant_profile,
    "affine_gap": _affine_gap_profile,
    "sinusoid": _sinusoid_profile,
}


def wall_registry() -> tuple:
    return tuple(sorted(_REGISTRY))


def make_walls(name: str, grid: Grid, **params) -> WallPair:
    """Build a WallPair from the analytic registry."""
    if name not in _REGISTRY:
        raise ConfigurationError(
            f"unknown wall profile {name!r}; registry: {wall_registry()}")
    try:
        l1, l2, f1, f2, e1, e2 = _REGISTRY[name](grid, **params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for wall profile {name!r}: {exc}")
    return WallPair(l1, l2, f1, f2, provenance="analytic", name=name,
                    params=dict(params), endpoint_lambda1=e1, endpoint_lambda2=e2)


@dataclass
class WallCheck:
    condition: str
    status: str  # "pass" | "fail" | "skipped"
    detail: str = ""
    first_violation: tuple | None = None  # (step, cell) or (step, end)


@dataclass
class WallReport:
    checks: list

    def status(self, condition: str) -> str:
        for c in self.checks:
            if c.condition == condition:
                return c.status
        raise KeyError(condition)

    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def lines(self) -> list:
        out = []
        for c in self.checks:
            msg = f"{c.condition}: {c.status}"
            if c.detail:
                msg += f" ({c.detail})"
            out.append(msg)
        return out


def _first_bad(mask: np.ndarray):
    idx = np.argwhere(mask)
    return None if idx.size == 0 else tuple(int(v) for v in idx[0])


def validate_walls(walls: WallPair, grid: Grid,
                   h4_override: bool = False) -> WallReport:
    """Check wall admissibility.  Raises ConfigurationError on a fatal
    violation (H1 always; H4 unless h4_override); otherwise returns the
    report with one entry per condition."""
    shape = (grid.nt + 1, grid.n_cells)
    for label, arr in (("lambda1", walls.lambda1), ("lambda2", walls.lambda2),
                       ("forcing1", walls.forcing1), ("forcing2", walls.forcing2)):
        if arr.shape != shape:
            raise ConfigurationError(
                f"walls.{label} has shape {arr.shape}, expected {shape}")
    checks = []

    bad = ~(walls.lambda1 < walls.lambda2)
    loc = _first_bad(bad)
    if loc is not None:
        t_idx, x_idx = loc
        raise ConfigurationError(
            f"H1 violated: walls touch or cross at step {t_idx}, cell {x_idx} "
            f"(t={t_idx * grid.dt:g}, x={grid.x_coords[x_idx]:g})")
    checks.append(WallCheck("H1", "pass", "strict separation"))

    gap = walls.gap()
    shrink = gap[1:] < gap[:-1] - 1e-12
    loc = _first_bad(shrink)
    if loc is not None:
        t_idx, x_idx = loc
        detail = (f"gap shrinks at step {t_idx + 1}, cell {x_idx} "
                  f"(t={(t_idx + 1) * grid.dt:g})")
        if not h4_override:
            raise ConfigurationError(f"H4 violated: {detail}")
        checks.append(WallCheck("H4", "fail", detail + "; overridden",
                                (t_idx + 1, x_idx)))
    else:
        checks.append(WallCheck("H4", "pass", "gap nondecreasing in time"))

    finite = (np.isfinite(walls.forcing1).all() and np.isfinite(walls.forcing2).all()
              and np.isfinite(walls.lambda1).all() and np.isfinite(walls.lambda2).all())
    checks.append(WallCheck("H2", "pass" if finite else "fail",
                            "walls and forcings finite"))

    if grid.is_circle():
        checks.append(WallCheck("H0", "skipped", "circle grid has no endpoints"))
        checks.append(WallCheck("H3", "skipped", "circle grid has no endpoints"))
    elif walls.endpoint_lambda1 is None or walls.endpoint_lambda2 is None:
        checks.append(WallCheck("H0", "skipped", "no endpoint samples"))
        checks.append(WallCheck("H3", "skipped", "no endpoint samples"))
    else:
        e1, e2 = walls.endpoint_lambda1, walls.endpoint_lambda2
        bad0 = (e1 > 0) | (e2 < 0)
        loc = _first_bad(bad0)
        if loc is None:
            checks.append(WallCheck("H0", "pass",
                                    "lower <= 0 <= upper at both endpoints"))
        else:
            checks.append(WallCheck(
                "H0", "fail",
                f"endpoint sign condition fails at step {loc[0]}, end {loc[1]}",
                loc))
        moved = (np.abs(np.diff(e1, axis=0)) > 1e-12) | \
                (np.abs(np.diff(e2, axis=0)) > 1e-12)
        loc = _first_bad(moved)
        if loc is None:
            checks.append(WallCheck("H3", "pass", "endpoint walls frozen in time"))
        else:
            checks.append(WallCheck(
                "H3", "fail",
                f"wall moves at an endpoint (step {loc[0] + 1}, end {loc[1]})",
                (loc[0] + 1, loc[1])))
    return WallReport(checks)


def save_walls_csv(walls: WallPair, grid: Grid, path: str) -> None:
    """Write walls as long-format CSV with columns t,x,lambda1,lambda2."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "lambda1", "lambda2"])
        for n in range(grid.nt + 1):
            t = n * grid.dt
            for j in range(grid.n_cells):
                w.writerow([repr(t), repr(float(grid.x_coords[j])),
                            repr(float(walls.lambda1[n, j])),
                            repr(float(walls.lambda2[n, j]))])


def load_walls_csv(path: str, grid: Grid) -> WallPair:
    """Load tabulated walls.  The file must cover the grid's full (t, x)
    lattice exactly (any row order); interval files may additionally carry
    x=0 and x=1 rows, which feed the endpoint checks.  Forcings are
    reconstructed by finite differences."""
    rows = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigurationError(f"cannot read walls CSV {path!r}: {exc}")
    with fh:
        reader = csv.DictReader(fh)
        need = {"t", "x", "lambda1", "lambda2"}
        if reader.fieldnames is None or not need.issubset(reader.fieldnames):
            raise ConfigurationError(
                f"walls CSV must have columns t,x,lambda1,lambda2, got "
                f"{reader.fieldnames}")
        for rec in reader:
            rows.append((float(rec["t"]), float(rec["x"]),
                         float(rec["lambda1"]), float(rec["lambda2"])))
    if not rows:
        raise ConfigurationError("walls CSV is empty")

    lut = {}
    for t, x, l1, l2 in rows:
        lut[(round(t / grid.dt), x)] = (l1, l2)

    def nearest_x(x_target):
        # exact float match is fragile across writers; snap within a half-cell
        best = None
        for (n, x) in lut:
            if n == 0 and abs(x - x_target) < grid.dx * 0.5:
                best = x
                break
        return best

    x_keys = [nearest_x(float(xc)) for xc in grid.x_coords]
    if any(k is None for k in x_keys):
        raise ConfigurationError("walls CSV does not cover the grid's x nodes")
    l1 = np.empty((grid.nt + 1, grid.n_cells))
    l2 = np.empty((grid.nt + 1, grid.n_cells))
    try:
        for n in range(grid.nt + 1):
            for j, xk in enumerate(x_keys):
                l1[n, j], l2[n, j] = lut[(n, xk)]
    except KeyError as exc:
        raise ConfigurationError(f"walls CSV missing lattice entry {exc}")

    e1 = e2 = None
    if not grid.is_circle():
        x0, x1 = nearest_x(0.0), nearest_x(1.0)
        if x0 is not None and x1 is not None and abs(x0) < grid.dx * 0.25 \
                and abs(x1 - 1.0) < grid.dx * 0.25:
            e1 = np.empty((grid.nt + 1, 2))
            e2 = np.empty((grid.nt + 1, 2))
            for n in range(grid.nt + 1):
                e1[n, 0], e2[n, 0] = lut[(n, x0)]
                e1[n, 1], e2[n, 1] = lut[(n, x1)]
    f1 = _fd_forcing(l1, grid, e1)
    f2 = _fd_forcing(l2, grid, e2)
    return WallPair(l1, l2, f1, f2, provenance="tabulated", name="csv",
                    params={"path": str(path)},
                    endpoint_lambda1=e1, endpoint_lambda2=e2)
