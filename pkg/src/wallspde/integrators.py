"""Time steppers for the stochastic heat equation between two walls.

All steppers share one update: with the state X_n at time n*dt,

    (I - dt*Lap_h) X~ = X_n + dt*(f + g)(X_n) + chi(X_n) * xi_n * sqrt(dt/dx),

where xi_n are the step's unit normals (one per cell, cell-major order) and g
is the singular drift, floored at max(spec floors, dx/10) in every stochastic
run and tamed per step.  The reflected stepper then clamps X~ to the new-time
walls and books each correction times dx into the ledger; the clipped and
single-wall steppers never project.

picard_solve realizes the same fixed point constructively: it alternates the
mild-solution driver v_n (heat-kernel quadrature of initial data, drift, and
the reused noise increments) with the deterministic obstacle solve for Xi_n,
stopping when successive iterates agree in sup norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .coefficients import CoefficientSpec
from .errors import ConfigurationError, DivergenceError, ResolutionError
from .grids import Grid, NoiseStream, sample_noise_field
from .kernels import heat_propagate
from .linalg import make_heat_solver, tame
from .obstacle import (OVERFLOW_GUARD, ReflectionLedger, SingularDriftSpec,
                       clipped_drift, regularized_drift, solve_obstacle)
from .walls import WallPair

__all__ = [
    "SolutionPath",
    "PicardState",
    "EnvelopeReport",
    "effective_drift_spec",
    "step_reflected",
    "simulate_reflected",
    "simulate_clipped",
    "simulate_single_wall",
    "picard_solve",
    "make_test_function",
    "weak_form_residual",
    "simulate_restart_envelope",
]


def effective_drift_spec(spec: SingularDriftSpec, grid: Grid) -> SingularDriftSpec:
    """Stochastic-run drift spec: floors raised to at least dx/10 so the
    explicit singular terms stay bounded at discretization order."""
    floor = grid.dx / 10.0
    return replace(spec,
                   floor_delta=max(spec.floor_delta, floor),
                   floor_delta_tilde=max(spec.floor_delta_tilde, floor))


def _drift(form: str, state, lower, upper, spec: SingularDriftSpec):
    if form == "clipped":
        return clipped_drift(state, lower, upper, spec)
    return regularized_drift(state, lower, upper, spec)


@dataclass(eq=False)
class SolutionPath:
    """One realized trajectory: states at every step endpoint, the reflection
    ledger (all zeros for unprojected runs), the noise that drove it, and
    enough config/seed provenance to reproduce or audit it."""

    X: np.ndarray                 # (nt+1, n_cells)
    ledger: ReflectionLedger
    noise: np.ndarray             # (nt, n_cells), unit normals
    grid: Grid
    walls: WallPair
    mode: str
    master_seed: int
    path_index: int
    config: dict = field(default_factory=dict)
    stop_step: int | None = None

    @property
    def stop_time(self) -> float | None:
        return None if self.stop_step is None else self.stop_step * self.grid.dt


def _snapshot(mode: str, spec: SingularDriftSpec, spec_eff: SingularDriftSpec,
              coeff: CoefficientSpec, walls: WallPair, grid: Grid,
              stream: NoiseStream) -> dict:
    return {
        "mode": mode,
        "domain": grid.domain_kind,
        "nx": grid.nx, "nt": grid.nt, "T": grid.T,
        "c1": spec.c1, "c2": spec.c2, "theta": spec.theta,
        "eps1": spec.eps1, "eps2": spec.eps2,
        "floor_delta": spec.floor_delta,
        "floor_delta_tilde": spec.floor_delta_tilde,
        "floor_delta_eff": spec_eff.floor_delta,
        "floor_delta_tilde_eff": spec_eff.floor_delta_tilde,
        "f": coeff.f_name, "f_params": dict(coeff.f_params),
        "chi": coeff.chi_name, "chi_params": dict(coeff.chi_params),
        "walls": walls.name, "wall_params": dict(walls.params),
        "master_seed": stream.master_seed, "path_index": stream.path_index,
    }


def _check_x0(x0: np.ndarray, walls: WallPair, grid: Grid) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (grid.n_cells,):
        raise ConfigurationError(
            f"x0 has shape {x0.shape}, expected ({grid.n_cells},)")
    if np.any(x0 < walls.lambda1[0]) or np.any(x0 > walls.lambda2[0]):
        raise ConfigurationError("x0 must lie between the walls at t = 0")
    return x0


def _reflected_raw(state, step, walls, coeff, spec_eff, noise, grid,
                   heat_solve):
    """Unguarded reflected update.  Returns (pre, new_state, up, down); the
    caller decides what a non-finite pre-projection row means."""
    dt, dx = grid.dt, grid.dx
    t = step * dt
    x = grid.x_coords
    g = tame(_drift("regularized", state, walls.lambda1[step],
                    walls.lambda2[step], spec_eff), dt)
    rhs = state + dt * (coeff.f(x, t, state) + g) \
        + coeff.chi(x, t, state) * noise * math.sqrt(dt / dx)
    pre = heat_solve(rhs)
    l1, l2 = walls.lambda1[step + 1], walls.lambda2[step + 1]
    with np.errstate(invalid="ignore"):
        new_state = np.clip(pre, l1, l2)
        up = np.where(pre < l1, l1 - pre, 0.0) * dx
        down = np.where(pre > l2, pre - l2, 0.0) * dx
    return pre, new_state, up, down


def step_reflected(state: np.ndarray, step: int, walls: WallPair,
                   coeff: CoefficientSpec, spec: SingularDriftSpec,
                   noise: np.ndarray, grid: Grid, heat_solve=None):
    """Advance one reflected step from time step*dt.  state and noise may be
    (n_cells,) or a (paths, n_cells) batch; wall rows broadcast over paths.
    Returns (new_state, upsilon_row, gamma_row) with the mass increments
    (correction times dx) of this step.
    """
    spec_eff = effective_drift_spec(spec, grid)
    if heat_solve is None:
        heat_solve = make_heat_solver(grid, grid.dt)
    pre, new_state, up, down = _reflected_raw(state, step, walls, coeff,
                                              spec_eff, noise, grid,
                                              heat_solve)
    bad = ~np.isfinite(pre) | (np.abs(pre) > OVERFLOW_GUARD)
    if bad.any():
        raise DivergenceError(
            f"reflected step {step + 1} left the overflow guard; "
            f"retry with dt <= {grid.dt / 4:g}")
    return new_state, up, down


def _step_free(form: str, state, step, walls, coeff, spec_eff, noise, grid,
               heat_solve):
    """Unprojected step (clipped or single-wall drift form)."""
    dt, dx = grid.dt, grid.dx
    t = step * dt
    x = grid.x_coords
    g = tame(_drift(form, state, walls.lambda1[step], walls.lambda2[step],
                    spec_eff), dt)
    rhs = state + dt * (coeff.f(x, t, state) + g) \
        + coeff.chi(x, t, state) * noise * math.sqrt(dt / dx)
    pre = heat_solve(rhs)
    if not np.all(np.isfinite(pre)) or np.max(np.abs(pre)) > OVERFLOW_GUARD:
        raise DivergenceError(
            f"step {step + 1} left the overflow guard; retry with dt <= {dt/4:g}")
    return pre


def simulate_reflected(x0: np.ndarray, walls: WallPair, coeff: CoefficientSpec,
                       spec: SingularDriftSpec, grid: Grid,
                       stream: NoiseStream) -> SolutionPath:
    """Full reflected trajectory.  The recorded states satisfy
    lower <= X <= upper exactly at every step, and the ledger's recorded
    points sit exactly on the wall they were projected to."""
    x0 = _check_x0(x0, walls, grid)
    spec_eff = effective_drift_spec(spec, grid)
    heat_solve = make_heat_solver(grid, grid.dt)
    nt = grid.nt
    X = np.empty((nt + 1, grid.n_cells))
    X[0] = x0
    noise = np.empty((nt, grid.n_cells))
    ledger = ReflectionLedger.zeros(nt, grid.n_cells)
    cur = X[0]
    for n in range(nt):
        noise[n] = sample_noise_field(stream, grid)
        cur, up, down = step_reflected(cur, n, walls, coeff, spec_eff,
                                       noise[n], grid, heat_solve)
        X[n + 1] = cur
        ledger.upsilon_mass[n + 1] = up
        ledger.gamma_mass[n + 1] = down
    cfg = _snapshot("reflected", spec, spec_eff, coeff, walls, grid, stream)
    return SolutionPath(X, ledger, noise, grid, walls, "reflected",
                        stream.master_seed, stream.path_index, cfg)


def simulate_clipped(x0: np.ndarray, walls: WallPair, coeff: CoefficientSpec,
                     spec: SingularDriftSpec, grid: Grid,
                     stream: NoiseStream) -> SolutionPath:
    """Unreflected comparison dynamics: the clipped drift keeps repelling at
    the walls but decays again past them, no projection happens, and the
    ledger stays empty.  The state may leave the band."""
    x0 = _check_x0(x0, walls, grid)
    spec_eff = effective_drift_spec(spec, grid)
    heat_solve = make_heat_solver(grid, grid.dt)
    nt = grid.nt
    X = np.empty((nt + 1, grid.n_cells))
    X[0] = x0
    noise = np.empty((nt, grid.n_cells))
    cur = X[0]
    for n in range(nt):
        noise[n] = sample_noise_field(stream, grid)
        cur = _step_free("clipped", cur, n, walls, coeff, spec_eff, noise[n],
                         grid, heat_solve)
        X[n + 1] = cur
    cfg = _snapshot("clipped", spec, spec_eff, coeff, walls, grid, stream)
    return SolutionPath(X, ReflectionLedger.zeros(nt, grid.n_cells), noise,
                        grid, walls, "clipped", stream.master_seed,
                        stream.path_index, cfg)


def simulate_single_wall(x0: np.ndarray, walls: WallPair,
                         coeff: CoefficientSpec, spec: SingularDriftSpec,
                         grid: Grid, stream: NoiseStream,
                         stop_threshold: float = 0.0) -> SolutionPath:
    """Lower-wall-only dynamics: c2 is forced to zero, nothing is projected,
    and the run stops early once min_x(state - lower) <= stop_threshold,
    recording the stop step.  Later rows repeat the final state so the
    trajectory keeps its (nt+1, n_cells) shape."""
    x0 = _check_x0(x0, walls, grid)
    spec1 = replace(spec, c2=0.0)
    spec_eff = effective_drift_spec(spec1, grid)
    heat_solve = make_heat_solver(grid, grid.dt)
    nt = grid.nt
    X = np.empty((nt + 1, grid.n_cells))
    X[0] = x0
    noise = np.zeros((nt, grid.n_cells))
    cur = X[0]
    stop_step = None
    for n in range(nt):
        noise[n] = sample_noise_field(stream, grid)
        cur = _step_free("regularized", cur, n, walls, coeff, spec_eff,
                         noise[n], grid, heat_solve)
        X[n + 1] = cur
        if float(np.min(cur - walls.lambda1[n + 1])) <= stop_threshold:
            stop_step = n + 1
            X[n + 2:] = cur
            break
    cfg = _snapshot("single_wall", spec1, spec_eff, coeff, walls, grid, stream)
    cfg["stop_threshold"] = stop_threshold
    return SolutionPath(X, ReflectionLedger.zeros(nt, grid.n_cells), noise,
                        grid, walls, "single_wall", stream.master_seed,
                        stream.path_index, cfg, stop_step=stop_step)


@dataclass
class PicardState:
    """Where the constructive iteration ended: the final driver v, obstacle
    part xi, state x = xi + v, and the sup-distance history between
    successive iterates."""

    n_iter: int
    v: np.ndarray
    xi: np.ndarray
    x: np.ndarray
    history: list
    converged: bool


def picard_solve(x0: np.ndarray, walls: WallPair, coeff: CoefficientSpec,
                 spec: SingularDriftSpec, grid: Grid, stream: NoiseStream,
                 max_iter: int = 12, tol: float = 1e-6):
    """Constructive fixed-point solve.

    Iteration n builds the driver by the mild-solution recursion

        v(t+dt) = P_dt [ v(t) + dt*f(., t, X_{n-1}(t))
                          + chi(., t, X_{n-1}(t)) * xi_t * sqrt(dt/dx) ],

    with P_dt the heat semigroup in its spectral form (heat_propagate; the
    sampled-kernel quadrature is not usable per step, see that docstring)
    and v(0) = x0, then solves the deterministic obstacle problem for Xi_n
    and sets X_n = Xi_n + v_n.  The noise field is drawn once (same stream
    order as the direct stepper) and reused across iterations.  X_0 is the
    initial field held constant.

    Returns (SolutionPath of the final iterate, PicardState).
    """
    x0 = _check_x0(x0, walls, grid)
    if max_iter < 1:
        raise ConfigurationError("picard_solve needs max_iter >= 1")
    spec_eff = effective_drift_spec(spec, grid)
    nt, dt, dx = grid.nt, grid.dt, grid.dx
    x = grid.x_coords
    noise = np.empty((nt, grid.n_cells))
    for n in range(nt):
        noise[n] = sample_noise_field(stream, grid)
    scale = math.sqrt(dt / dx)

    X_prev = np.tile(x0, (nt + 1, 1))
    history = []
    converged = False
    v = xi = X_cur = None
    sol = None
    n_iter = 0
    for it in range(1, max_iter + 1):
        n_iter = it
        v = np.empty((nt + 1, grid.n_cells))
        v[0] = x0
        for k in range(nt):
            t = k * dt
            load = v[k] + dt * coeff.f(x, t, X_prev[k]) \
                + coeff.chi(x, t, X_prev[k]) * noise[k] * scale
            v[k + 1] = heat_propagate(load, dt, grid)
        sol = solve_obstacle(v, walls, spec_eff, grid)
        xi = sol.xi
        X_cur = xi + v
        dist = float(np.max(np.abs(X_cur - X_prev)))
        history.append(dist)
        X_prev = X_cur
        if dist < tol:
            converged = True
            break
    state = PicardState(n_iter, v, xi, X_cur, history, converged)
    cfg = _snapshot("picard", spec, spec_eff, coeff, walls, grid, stream)
    cfg["max_iter"] = max_iter
    cfg["tol"] = tol
    path = SolutionPath(X_cur, sol.ledger, noise, grid, walls, "picard",
                        stream.master_seed, stream.path_index, cfg)
    return path, state


def make_test_function(name: str, grid: Grid, wavenumber: int = 1) -> np.ndarray:
    """Grid samples of a weak-form test function.  'sine' is sin(pi*k*x) on
    the interval (vanishes at the pinned ends) and sin(2*pi*k*x) on the
    circle; 'bump' is x^2*(1-x)^2 on the interval and sin^2(pi*x) on the
    circle.  Both are smooth with the right boundary behavior."""
    x = grid.x_coords
    if name == "sine":
        k = math.pi * wavenumber if not grid.is_circle() \
            else 2.0 * math.pi * wavenumber
        return np.sin(k * x)
    if name == "bump":
        if grid.is_circle():
            return np.sin(math.pi * x) ** 2
        return (x * (1.0 - x)) ** 2
    raise ConfigurationError(
        f"unknown test function {name!r}; choices: sine, bump")


def _psi_second_difference(psi: np.ndarray, grid: Grid) -> np.ndarray:
    dx2 = grid.dx * grid.dx
    if grid.is_circle():
        return (np.roll(psi, -1) - 2.0 * psi + np.roll(psi, 1)) / dx2
    out = np.empty_like(psi)
    out[1:-1] = (psi[2:] - 2.0 * psi[1:-1] + psi[:-2]) / dx2
    out[0] = (psi[1] - 2.0 * psi[0]) / dx2          # ghost zero at x = 0
    out[-1] = (-2.0 * psi[-1] + psi[-2]) / dx2      # ghost zero at x = 1
    return out


def _trapezoid_time(rows: np.ndarray, dt: float) -> float:
    return float(dt * (0.5 * rows[0] + rows[1:-1].sum() + 0.5 * rows[-1]))


def weak_form_residual(path: SolutionPath, psi: np.ndarray,
                       coeff: CoefficientSpec, spec: SingularDriftSpec,
                       grid: Grid, noise: np.ndarray | None = None,
                       include_ledger: bool = True) -> float:
    """Absolute defect of the weak form along a stored trajectory:

        (X_T, psi) - (X_0, psi) - int (X, psi'') dt - int (f, psi) dt
        - int (g, psi) dt - sum (chi * xi * sqrt(dt/dx), psi)
        - sum psi * (upsilon - gamma),

    with trapezoid time sums, centered psi'' (ghost zeros at interval
    endpoints), and the drift g reconstructed exactly as the integrator
    applied it (effective floors, tamed).  include_ledger=False drops the
    measure term (ablation check).
    """
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (grid.n_cells,):
        raise ConfigurationError(
            f"psi has shape {psi.shape}, expected ({grid.n_cells},)")
    if noise is None:
        noise = path.noise
    if noise.shape != (grid.nt, grid.n_cells):
        raise ConfigurationError(
            f"noise has shape {noise.shape}, expected ({grid.nt}, {grid.n_cells})")
    form = "clipped" if path.mode == "clipped" else "regularized"
    spec_eff = effective_drift_spec(spec, grid)
    X = path.X
    walls = path.walls
    dt, dx = grid.dt, grid.dx
    xg = grid.x_coords
    psi_dd = _psi_second_difference(psi, grid)

    def inner(rows, w):
        return dx * (rows * w).sum(axis=-1)

    nrows = grid.nt + 1
    lap_rows = np.empty(nrows)
    f_rows = np.empty(nrows)
    g_rows = np.empty(nrows)
    for k in range(nrows):
        t = k * dt
        lap_rows[k] = inner(X[k], psi_dd)
        f_rows[k] = inner(coeff.f(xg, t, X[k]), psi)
        g_rows[k] = inner(tame(_drift(form, X[k], walls.lambda1[k],
                                      walls.lambda2[k], spec_eff), dt), psi)
    noise_sum = 0.0
    scale = math.sqrt(dt / dx)
    for k in range(grid.nt):
        t = k * dt
        noise_sum += inner(coeff.chi(xg, t, X[k]) * noise[k] * scale, psi)
    res = inner(X[-1], psi) - inner(X[0], psi) \
        - _trapezoid_time(lap_rows, dt) - _trapezoid_time(f_rows, dt) \
        - _trapezoid_time(g_rows, dt) - noise_sum
    if include_ledger:
        res -= float(((path.ledger.upsilon_mass - path.ledger.gamma_mass)
                      * psi).sum())
    return abs(float(res))


@dataclass
class EnvelopeReport:
    """Per-block statistics of the restart construction."""

    beta: float
    n_blocks: int
    steps_per_block: int
    dt_block: float
    kappa: float
    threshold: float
    block_min: np.ndarray     # (n_blocks,) min over block of (w - lower)
    block_max: np.ndarray
    exceed: np.ndarray        # (n_blocks,) bool: noise functional over threshold
    corridor_exit: np.ndarray  # (n_blocks,) bool: w - lower left [delta/2, 2*delta]

    @property
    def exit_fraction(self) -> float:
        return float(np.mean(self.corridor_exit))

    @property
    def exceed_fraction(self) -> float:
        return float(np.mean(self.exceed))


def _walls_at(walls: WallPair, grid: Grid, t: float):
    """Wall rows at an off-lattice time by linear interpolation."""
    s = t / grid.dt
    k = min(int(s), grid.nt - 1)
    frac = s - k
    l1 = (1.0 - frac) * walls.lambda1[k] + frac * walls.lambda1[k + 1]
    l2 = (1.0 - frac) * walls.lambda2[k] + frac * walls.lambda2[k + 1]
    return l1, l2


def simulate_restart_envelope(walls: WallPair, coeff: CoefficientSpec,
                              spec: SingularDriftSpec, delta: float,
                              grid: Grid, stream: NoiseStream,
                              kappa: float | None = None,
                              threshold_scale: float = 1.0) -> EnvelopeReport:
    """Block-restart study for steep exponents (theta > 3).

    Time is cut into blocks of length beta = 2**(-theta-2) * delta**(1+theta).
    Each block restarts the comparison state at w = lower + delta and
    integrates the clipped dynamics (lower floor delta/2); the block-wise
    stochastic convolution N (the heat semigroup applied to chi dW alone,
    reset at each restart) is accumulated alongside and tested against the
    scaling threshold sup|N| / (t - t_block)**kappa <= threshold, with
    kappa inside (1/(theta+1), 1/4) and the threshold constant

        delta**(1 - kappa*(1+theta)) * 2**(-3 - 2*theta + kappa*(theta+2)),

    scaled by threshold_scale (the constant is configurable, not certified).
    Reports per-block extremes of w - lower, threshold exceedances, and
    corridor exits from [delta/2, 2*delta].
    """
    if not spec.theta > 3:
        raise ConfigurationError("restart envelope needs theta > 3")
    if not delta > 0:
        raise ConfigurationError("delta must be positive")
    theta = spec.theta
    beta = 2.0 ** (-theta - 2.0) * delta ** (1.0 + theta)
    if beta < 10.0 * grid.dt:
        raise ResolutionError(
            f"block length beta={beta:g} needs dt <= {beta / 10.0:g}; "
            f"grid has dt={grid.dt:g}")
    n_blocks = int(grid.T / beta)
    if n_blocks < 1:
        raise ConfigurationError(
            f"horizon T={grid.T:g} is shorter than one block (beta={beta:g})")
    if kappa is None:
        kappa = 0.5 * (1.0 / (theta + 1.0) + 0.25)
    if not (1.0 / (theta + 1.0) < kappa < 0.25):
        raise ConfigurationError(
            f"kappa={kappa:g} must lie in (1/(theta+1), 1/4)")
    threshold = threshold_scale * delta ** (1.0 - kappa * (1.0 + theta)) \
        * 2.0 ** (-3.0 - 2.0 * theta + kappa * (theta + 2.0))

    steps = max(10, round(beta / grid.dt))
    dt_b = beta / steps
    floor_tilde = spec.floor_delta_tilde if spec.floor_delta_tilde > 0 \
        else delta / 2.0
    spec_b = replace(spec, floor_delta=delta / 2.0,
                     floor_delta_tilde=floor_tilde)
    heat_solve = make_heat_solver(grid, dt_b)
    scale = math.sqrt(dt_b / grid.dx)
    xg = grid.x_coords

    block_min = np.empty(n_blocks)
    block_max = np.empty(n_blocks)
    exceed = np.zeros(n_blocks, dtype=bool)
    for k in range(n_blocks):
        t0 = k * beta
        l1, _ = _walls_at(walls, grid, t0)
        w = l1 + delta
        conv = np.zeros(grid.n_cells)
        lo = math.inf
        hi = -math.inf
        for j in range(steps):
            t = t0 + j * dt_b
            l1, l2 = _walls_at(walls, grid, t)
            g = tame(clipped_drift(w, l1, l2, spec_b), dt_b)
            shot = coeff.chi(xg, t, w) * sample_noise_field(stream, grid) * scale
            w = heat_solve(w + dt_b * (coeff.f(xg, t, w) + g) + shot)
            conv = heat_solve(conv + shot)
            if not np.all(np.isfinite(w)) or np.max(np.abs(w)) > OVERFLOW_GUARD:
                raise DivergenceError(
                    f"restart block {k} diverged; retry with a smaller dt")
            l1n, _ = _walls_at(walls, grid, t + dt_b)
            gap = w - l1n
            lo = min(lo, float(np.min(gap)))
            hi = max(hi, float(np.max(gap)))
            elapsed = (j + 1) * dt_b
            if float(np.max(np.abs(conv))) / elapsed ** kappa > threshold:
                exceed[k] = True
        block_min[k] = lo
        block_max[k] = hi
    corridor_exit = (block_min < delta / 2.0) | (block_max > 2.0 * delta)
    return EnvelopeReport(beta, n_blocks, steps, dt_b, kappa, threshold,
                          block_min, block_max, exceed, corridor_exit)
