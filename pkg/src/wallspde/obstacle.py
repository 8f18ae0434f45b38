"""Deterministic two-wall obstacle problems with singular repelling drifts.

Solves, for a given continuous driver v with v(., 0) = X0,

    dXi/dt = d2Xi/dx2 + g(Xi + v) + Upsilon - Gamma,   Xi(., 0) = 0,

subject to lower <= Xi + v <= upper, where g is the regularized drift

    g(u) = c1 / (eps1 + max(u - lower, floor))**theta
         - c2 / (eps2 + max(upper - u, floor~))**theta.

Two interchangeable backends:

  * solve_penalized  -- replaces the reflecting measures by steep one-sided
    penalty terms rho * (lower - u)^+ - rho * (u - upper)^+;
  * solve_obstacle / solve_reflected_pde -- projects onto the admissible band
    after each semi-implicit step and books every correction, times cell
    width, into a ReflectionLedger (so complementarity holds exactly at the
    recorded points).

Both treat the Laplacian implicitly and the drift explicitly at the previous
step's state; explicit drifts are tamed per step (see linalg.tame).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (ConfigurationError, DivergenceError, SingularityError)
from .grids import Grid
from .linalg import make_heat_solver, tame
from .walls import WallPair

__all__ = [
    "SingularDriftSpec",
    "ReflectionLedger",
    "ObstacleSolution",
    "ContractionResult",
    "regularized_drift",
    "clipped_drift",
    "solve_reflected_pde",
    "solve_penalized",
    "solve_obstacle",
    "geometric_schedule",
    "complementarity_residual",
    "contraction_check",
]

OVERFLOW_GUARD = 1e8


@dataclass(frozen=True)
class SingularDriftSpec:
    """Strengths, exponent, epsilon-regularization, and clip floors of the
    two singular drift terms.  floor_delta / floor_delta_tilde are the values
    the wall gaps are clipped at before raising to the power (the delta/2 and
    delta~/2 of the clipped construction)."""

    c1: float = 1.0
    c2: float = 1.0
    theta: float = 1.0
    eps1: float = 0.0
    eps2: float = 0.0
    floor_delta: float = 0.0
    floor_delta_tilde: float = 0.0

    def __post_init__(self):
        if self.c1 < 0 or self.c2 < 0:
            raise ConfigurationError("drift strengths c1, c2 must be >= 0")
        if self.theta < 0:
            raise ConfigurationError("theta must be >= 0")
        for nm in ("eps1", "eps2", "floor_delta", "floor_delta_tilde"):
            if getattr(self, nm) < 0:
                raise ConfigurationError(f"{nm} must be >= 0")

    def require_regularized(self) -> None:
        """Solver entry check: a positive singular term needs eps or a floor."""
        if self.theta > 0:
            if self.c1 > 0 and self.eps1 + self.floor_delta == 0:
                raise ConfigurationError(
                    "c1 > 0 with theta > 0 needs eps1 or floor_delta positive")
            if self.c2 > 0 and self.eps2 + self.floor_delta_tilde == 0:
                raise ConfigurationError(
                    "c2 > 0 with theta > 0 needs eps2 or floor_delta_tilde positive")


def regularized_drift(u, lower, upper, spec: SingularDriftSpec):
    """Pointwise drift c1/(eps1 + max(u-lower, floor))**theta
    - c2/(eps2 + max(upper-u, floor~))**theta.

    With eps = floor = 0 this is the exact singular drift; evaluating it at or
    past the corresponding wall raises SingularityError.
    """
    u = np.asarray(u, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    out = np.zeros(np.broadcast(u, lower, upper).shape, dtype=float)
    if spec.c1 > 0:
        base = spec.eps1 + np.maximum(u - lower, spec.floor_delta)
        if spec.theta > 0 and np.any(base <= 0):
            raise SingularityError(
                "exact singular drift evaluated at/past the lower wall")
        out = out + spec.c1 / base ** spec.theta
    if spec.c2 > 0:
        base = spec.eps2 + np.maximum(upper - u, spec.floor_delta_tilde)
        if spec.theta > 0 and np.any(base <= 0):
            raise SingularityError(
                "exact singular drift evaluated at/past the upper wall")
        out = out - spec.c2 / base ** spec.theta
    return out if out.ndim else float(out)


def clipped_drift(u, lower, upper, spec: SingularDriftSpec):
    """Drift of the unreflected comparison equation:
    c1*(|u-lower| v floor)**(-theta) - c2*(|upper-u| v floor~)**(-theta).

    Unlike regularized_drift this decays again once the state crosses a wall;
    floors must be positive for any active singular term.
    """
    if spec.theta > 0:
        if spec.c1 > 0 and spec.floor_delta <= 0:
            raise ConfigurationError("clipped drift needs floor_delta > 0")
        if spec.c2 > 0 and spec.floor_delta_tilde <= 0:
            raise ConfigurationError("clipped drift needs floor_delta_tilde > 0")
    u = np.asarray(u, dtype=float)
    out = np.zeros(np.broadcast(u, lower, upper).shape, dtype=float)
    if spec.c1 > 0:
        base = np.maximum(np.abs(u - lower), spec.floor_delta)
        out = out + spec.c1 / base ** spec.theta
    if spec.c2 > 0:
        base = np.maximum(np.abs(upper - u), spec.floor_delta_tilde)
        out = out - spec.c2 / base ** spec.theta
    return out if out.ndim else float(out)


@dataclass
class ReflectionLedger:
    """Mass the projection added (upsilon, toward the lower wall) or removed
    (gamma, at the upper wall), as measure mass per (step, cell): pointwise
    correction times cell width.  Row 0 is always zero."""

    upsilon_mass: np.ndarray
    gamma_mass: np.ndarray

    @classmethod
    def zeros(cls, nt: int, n_cells: int) -> "ReflectionLedger":
        return cls(np.zeros((nt + 1, n_cells)), np.zeros((nt + 1, n_cells)))

    def totals(self) -> tuple:
        return float(self.upsilon_mass.sum()), float(self.gamma_mass.sum())


def _check_driver(v: np.ndarray, walls: WallPair, grid: Grid) -> None:
    shape = (grid.nt + 1, grid.n_cells)
    if v.shape != shape:
        raise ConfigurationError(f"driver v has shape {v.shape}, expected {shape}")
    x0 = v[0]
    if np.any(x0 < walls.lambda1[0]) or np.any(x0 > walls.lambda2[0]):
        raise ConfigurationError(
            "initial state v(., 0) must lie between the walls")


def _spot_check_monotone(g, v: np.ndarray, grid: Grid, rng_steps=(0,)) -> None:
    """Cheap entry assertion that a drift handle is nonincreasing in state."""
    bump = 1e-3
    for n in rng_steps:
        n = min(n, grid.nt)
        base = v[n] * 0.0
        lo = np.asarray(g(n, base))
        hi = np.asarray(g(n, base + bump))
        if np.any(hi > lo + 1e-12):
            raise ConfigurationError(
                "drift handle is not monotone nonincreasing in the state")


def solve_reflected_pde(v: np.ndarray, walls: WallPair, g, grid: Grid):
    """Projection solver with a generic drift handle g(step, xi_row) acting on
    Xi.  Returns (xi, ledger) with xi shaped (nt+1, n_cells).

    Per step: solve (I - dt*Lap_h) xi~ = xi + dt*tame(g), then clamp
    xi~ + v at the new-time walls; clamp corrections times dx are booked
    into the ledger, so the recorded state sits exactly on the wall wherever
    mass was recorded.
    """
    _check_driver(v, walls, grid)
    nt, dt = grid.nt, grid.dt
    solve = make_heat_solver(grid, dt)
    xi = np.zeros((nt + 1, grid.n_cells))
    ledger = ReflectionLedger.zeros(nt, grid.n_cells)
    cur = xi[0]
    for n in range(nt):
        drift = tame(np.asarray(g(n, cur), dtype=float), dt)
        pre = solve(cur + dt * drift)
        if not np.all(np.isfinite(pre)) or np.max(np.abs(pre)) > OVERFLOW_GUARD:
            raise DivergenceError(
                f"obstacle step {n + 1} left the overflow guard; "
                f"retry with dt <= {dt / 4:g}")
        l1 = walls.lambda1[n + 1]
        l2 = walls.lambda2[n + 1]
        state = pre + v[n + 1]
        clamped = np.clip(state, l1, l2)
        up = clamped - state
        ledger.upsilon_mass[n + 1] = np.where(up > 0, up, 0.0) * grid.dx
        ledger.gamma_mass[n + 1] = np.where(up < 0, -up, 0.0) * grid.dx
        cur = clamped - v[n + 1]
        xi[n + 1] = cur
    return xi, ledger


def solve_penalized(v: np.ndarray, walls: WallPair, g_rho, rho: float,
                    grid: Grid) -> np.ndarray:
    """Penalization backend: no projection, no ledger; wall excursions are
    pushed back by explicit one-sided penalties rho*(lower-(Xi+v))^+ -
    rho*((Xi+v)-upper)^+.  The drift handle g_rho(step, xi_row) must be
    monotone nonincreasing in the state (spot-checked at entry).
    """
    _check_driver(v, walls, grid)
    if rho < 0:
        raise ConfigurationError("penalty strength rho must be >= 0")
    _spot_check_monotone(g_rho, v, grid, rng_steps=(0, grid.nt // 2))
    nt, dt = grid.nt, grid.dt
    solve = make_heat_solver(grid, dt)
    xi = np.zeros((nt + 1, grid.n_cells))
    cur = xi[0]
    for n in range(nt):
        drift = tame(np.asarray(g_rho(n, cur), dtype=float), dt)
        state = cur + v[n]
        pen = rho * np.maximum(walls.lambda1[n] - state, 0.0) \
            - rho * np.maximum(state - walls.lambda2[n], 0.0)
        pre = solve(cur + dt * (drift + pen))
        if not np.all(np.isfinite(pre)) or np.max(np.abs(pre)) > OVERFLOW_GUARD:
            raise DivergenceError(
                f"penalized step {n + 1} left the overflow guard; "
                f"retry with dt <= {dt / 4:g} or a smaller rho*dt")
        cur = pre
        xi[n + 1] = cur
    return xi


@dataclass
class ScheduleLevel:
    eps1: float
    eps2: float
    xi: np.ndarray
    sup_change: float  # sup |xi - previous level's xi|; nan for the first


@dataclass
class ObstacleSolution:
    """Final iterate of an epsilon schedule (or a single solve), its ledger,
    and per-level monotonicity diagnostics."""

    xi: np.ndarray
    ledger: ReflectionLedger
    levels: list = field(default_factory=list)
    xi_monotone_in_eps: bool = True        # larger eps1 => smaller xi
    shifted_monotone_in_eps: bool = True   # larger eps1 => larger eps1 + xi
    monotone_violation: float = 0.0


def geometric_schedule(eps1: float, eps2: float, n_levels: int = 3,
                       factor: float = 0.5) -> list:
    """Halving (eps1, eps2) schedule, largest first."""
    if n_levels < 1:
        raise ConfigurationError("schedule needs at least one level")
    return [(eps1 * factor ** k, eps2 * factor ** k) for k in range(n_levels)]


def solve_obstacle(v: np.ndarray, walls: WallPair, spec: SingularDriftSpec,
                   grid: Grid, schedule=None,
                   stop_tol: float = 1e-4) -> ObstacleSolution:
    """Projection solve of the two-wall problem with the regularized singular
    drift.  With a schedule (list of (eps1, eps2), decreasing), the solve is
    repeated per level, recording sup-norm changes and the two monotone-limit
    diagnostics (xi nonincreasing in eps1, eps1 + xi nondecreasing in eps1);
    iteration stops early once successive levels differ by under stop_tol.
    """
    pairs = schedule if schedule is not None else [(spec.eps1, spec.eps2)]
    if not pairs:
        raise ConfigurationError("empty epsilon schedule")
    sol = ObstacleSolution(xi=np.zeros(0), ledger=None)  # filled below
    prev_xi = None
    prev_eps1 = None
    worst = 0.0
    for (e1, e2) in pairs:
        level_spec = replace(spec, eps1=e1, eps2=e2)
        level_spec.require_regularized()

        def g(n, xi_row, _ls=level_spec, _v=v, _w=walls):
            return regularized_drift(xi_row + _v[n], _w.lambda1[n],
                                     _w.lambda2[n], _ls)

        xi, ledger = solve_reflected_pde(v, walls, g, grid)
        change = float("nan") if prev_xi is None else float(
            np.max(np.abs(xi - prev_xi)))
        sol.levels.append(ScheduleLevel(e1, e2, xi, change))
        if prev_xi is not None:
            # schedule runs eps downward, so the new xi may only increase;
            # the shifted field eps1 + xi may only decrease
            grow = float(np.max(prev_xi - xi))
            shrink = float(np.max((xi + e1) - (prev_xi + prev_eps1)))
            if grow > 1e-8:
                sol.xi_monotone_in_eps = False
            if shrink > 1e-8:
                sol.shifted_monotone_in_eps = False
            worst = max(worst, grow, shrink)
        sol.xi = xi
        sol.ledger = ledger
        if prev_xi is not None and change < stop_tol:
            break
        prev_xi, prev_eps1 = xi, e1
    sol.monotone_violation = worst
    return sol


def complementarity_residual(x: np.ndarray, walls: WallPair,
                             ledger: ReflectionLedger) -> tuple:
    """(r1, r2) with r1 = sum (X - lower)*upsilon and r2 = sum (upper - X)*gamma
    over all recorded (step, cell) points.  Exactly zero for projection-built
    ledgers, because recorded states sit exactly on the wall."""
    r1 = float(np.sum((x - walls.lambda1) * ledger.upsilon_mass))
    r2 = float(np.sum((walls.lambda2 - x) * ledger.gamma_mass))
    return r1, r2


@dataclass
class ContractionResult:
    lhs: float   # sup |Xi - Xi_hat|
    rhs: float   # sup |v - v_hat|
    passed: bool


def contraction_check(v: np.ndarray, v_hat: np.ndarray, walls: WallPair,
                      spec: SingularDriftSpec, grid: Grid,
                      tol: float = 1e-8) -> ContractionResult:
    """Solve the obstacle problem for both drivers and compare sup norms:
    the solution map is a sup-norm contraction, sup|Xi - Xi_hat| <=
    sup|v - v_hat|."""
    a = solve_obstacle(v, walls, spec, grid)
    b = solve_obstacle(v_hat, walls, spec, grid)
    lhs = float(np.max(np.abs(a.xi - b.xi)))
    rhs = float(np.max(np.abs(v - v_hat)))
    return ContractionResult(lhs, rhs, lhs <= rhs + tol)
