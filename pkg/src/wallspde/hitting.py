"""Wall-contact detection and Monte Carlo hitting-probability estimates.

Contact only counts strictly after t = 0 (the initial field may start on a
wall).  A reflected trajectory touches when the ledger booked mass at a step
or the recorded gap closed to eta or below; unprojected trajectories only
have the gap criterion (eta supports them: crossing is gradual there).  The
finite horizon T proxies tau < infinity; every estimate is P(tau <= T).

Estimates aggregate independent paths, each driven by its own counter-keyed
stream, so results do not depend on how paths are batched.  Paths that
diverge are marked failed and excluded from the estimate, with a count kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .coefficients import CoefficientSpec
from .errors import ConfigurationError, DivergenceError
from .grids import Grid, derive_stream, sample_noise_field
from .integrators import (SolutionPath, _reflected_raw, _snapshot,
                          effective_drift_spec)
from .linalg import make_heat_solver
from .obstacle import OVERFLOW_GUARD, SingularDriftSpec
from .output import config_hash
from .walls import WallPair

__all__ = [
    "WILSON_Z",
    "HITTING_CSV_HEADER",
    "wilson_interval",
    "min_gap_series",
    "detect_contact",
    "HittingRecord",
    "HittingRow",
    "HittingTable",
    "estimate_hitting_probability",
    "exponent_sweep",
    "TrendVerdict",
    "monotone_trend_verdict",
]

# two-sided 95% normal quantile
WILSON_Z = 1.959963984540054

HITTING_CSV_HEADER = ("theta,n_paths,n_hits,p_hat,ci_low,ci_high,"
                      "eta,T,seed,config_hash")

_WALL_CHOICES = ("lower", "upper", "either")


def wilson_interval(n_hits: int, n_paths: int, z: float = WILSON_Z):
    """Wilson score interval for a binomial proportion, clamped to [0, 1]."""
    if n_paths <= 0:
        raise ConfigurationError("wilson_interval needs n_paths >= 1")
    if not 0 <= n_hits <= n_paths:
        raise ConfigurationError("n_hits must lie in [0, n_paths]")
    p = n_hits / n_paths
    z2 = z * z
    denom = 1.0 + z2 / n_paths
    center = (p + z2 / (2.0 * n_paths)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n_paths
                         + z2 / (4.0 * n_paths * n_paths)) / denom
    # at p in {0, 1} the exact bound equals p; rounding can leave the
    # estimate just outside the interval, so clamp to contain it
    lo = min(max(0.0, center - half), p)
    hi = max(min(1.0, center + half), p)
    return lo, hi


def min_gap_series(path: SolutionPath):
    """Per-step minimum distance to each wall: (gap_lower, gap_upper),
    both shaped (nt+1,)."""
    gl = np.min(path.X - path.walls.lambda1, axis=1)
    gu = np.min(path.walls.lambda2 - path.X, axis=1)
    return gl, gu


@dataclass(eq=False)
class HittingRecord:
    """Stopping data of one trajectory: first contact time per wall (inf if
    never), their minimum tau, which wall(s) were hit, and the run's minimum
    gaps.  A gap of exactly eta counts as contact."""

    tau1: float
    tau2: float
    tau: float
    wall_hit: str  # "lower" | "upper" | "both" | "none"
    min_gap_lower: float
    min_gap_upper: float
    path_index: int | None = None
    failed: bool = False


def _wall_hit_label(tau1: float, tau2: float) -> str:
    if math.isinf(tau1) and math.isinf(tau2):
        return "none"
    if math.isinf(tau2):
        return "lower"
    if math.isinf(tau1):
        return "upper"
    return "both"


def detect_contact(path: SolutionPath, eta: float = 0.0) -> HittingRecord:
    """Scan a stored trajectory for first wall contact strictly after t = 0.

    Lower-wall contact at a step means positive upsilon mass booked there
    (reflected runs) or min gap <= eta; upper-wall contact is the gamma/upper
    analog.  Returns taus as times (step * dt), inf when no contact.
    """
    if eta < 0:
        raise ConfigurationError("eta must be nonnegative")
    gl, gu = min_gap_series(path)
    lo_hit = gl <= eta
    hi_hit = gu <= eta
    if path.mode == "reflected":
        lo_hit = lo_hit | (path.ledger.upsilon_mass.max(axis=1) > 0.0)
        hi_hit = hi_hit | (path.ledger.gamma_mass.max(axis=1) > 0.0)
    lo_hit[0] = False
    hi_hit[0] = False
    dt = path.grid.dt
    i1 = np.flatnonzero(lo_hit)
    i2 = np.flatnonzero(hi_hit)
    tau1 = float(i1[0] * dt) if i1.size else math.inf
    tau2 = float(i2[0] * dt) if i2.size else math.inf
    return HittingRecord(tau1, tau2, min(tau1, tau2),
                         _wall_hit_label(tau1, tau2),
                         float(gl.min()), float(gu.min()),
                         path_index=path.path_index)


@dataclass(eq=False)
class HittingRow:
    """One aggregated estimate; field order matches the CSV header."""

    theta: float
    n_paths: int
    n_hits: int
    p_hat: float
    ci_low: float
    ci_high: float
    eta: float
    T: float
    seed: int
    config_hash: str

    def csv_line(self) -> str:
        return ",".join([
            repr(float(self.theta)), str(self.n_paths), str(self.n_hits),
            repr(float(self.p_hat)), repr(float(self.ci_low)),
            repr(float(self.ci_high)), repr(float(self.eta)),
            repr(float(self.T)), str(self.seed), self.config_hash,
        ])


@dataclass(eq=False)
class HittingTable:
    """Estimates across exponents, one row per theta."""

    rows: list = field(default_factory=list)
    n_failed: int = 0

    def to_csv(self, pathname) -> None:
        lines = [HITTING_CSV_HEADER]
        lines.extend(row.csv_line() for row in self.rows)
        with open(pathname, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")

    def p_hats(self) -> np.ndarray:
        return np.array([row.p_hat for row in self.rows])


def _run_batches(x0, walls, coeff, spec, grid, n_paths, master_seed, eta,
                 batch_size):
    """Step all paths to T in batches under reflected dynamics.  Per-path
    streams keep the draws identical under any batch split.  Returns the
    per-path HittingRecords in path-index order."""
    spec_eff = effective_drift_spec(spec, grid)
    heat_solve = make_heat_solver(grid, grid.dt)
    records = []
    mid = 0.5 * (walls.lambda1 + walls.lambda2)
    dt = grid.dt
    for start in range(0, n_paths, batch_size):
        idx = range(start, min(start + batch_size, n_paths))
        streams = [derive_stream(master_seed, i) for i in idx]
        P = len(streams)
        state = np.tile(x0, (P, 1))
        step1 = np.full(P, -1, dtype=int)
        step2 = np.full(P, -1, dtype=int)
        failed = np.zeros(P, dtype=bool)
        mg_lo = np.min(state - walls.lambda1[0], axis=1)
        mg_hi = np.min(walls.lambda2[0] - state, axis=1)
        for n in range(grid.nt):
            noise = np.stack([sample_noise_field(s, grid) for s in streams])
            pre, state, up, down = _reflected_raw(state, n, walls, coeff,
                                                  spec_eff, noise, grid,
                                                  heat_solve)
            with np.errstate(invalid="ignore"):
                bad = (~np.isfinite(pre)
                       | (np.abs(pre) > OVERFLOW_GUARD)).any(axis=1)
            newly_bad = bad & ~failed
            if newly_bad.any():
                failed |= newly_bad
                # park failed rows mid-band so later steps stay finite
                state[newly_bad] = mid[n + 1]
            alive = ~failed
            gap_lo = np.min(state - walls.lambda1[n + 1], axis=1)
            gap_hi = np.min(walls.lambda2[n + 1] - state, axis=1)
            mg_lo[alive] = np.minimum(mg_lo[alive], gap_lo[alive])
            mg_hi[alive] = np.minimum(mg_hi[alive], gap_hi[alive])
            lo_now = alive & (step1 < 0) \
                & ((up.max(axis=1) > 0.0) | (gap_lo <= eta))
            hi_now = alive & (step2 < 0) \
                & ((down.max(axis=1) > 0.0) | (gap_hi <= eta))
            step1[lo_now] = n + 1
            step2[hi_now] = n + 1
        for j, i in enumerate(idx):
            if failed[j]:
                records.append(HittingRecord(
                    math.inf, math.inf, math.inf, "none", math.nan, math.nan,
                    path_index=i, failed=True))
                continue
            tau1 = step1[j] * dt if step1[j] >= 0 else math.inf
            tau2 = step2[j] * dt if step2[j] >= 0 else math.inf
            records.append(HittingRecord(
                tau1, tau2, min(tau1, tau2), _wall_hit_label(tau1, tau2),
                float(mg_lo[j]), float(mg_hi[j]), path_index=i))
    return records


def _selected_tau(record: HittingRecord, wall: str) -> float:
    if wall == "lower":
        return record.tau1
    if wall == "upper":
        return record.tau2
    return record.tau


def estimate_hitting_probability(x0, walls: WallPair, coeff: CoefficientSpec,
                                 spec: SingularDriftSpec, grid: Grid,
                                 n_paths: int, master_seed: int,
                                 eta: float = 0.0, wall: str = "either",
                                 batch_size: int = 64):
    """Monte Carlo estimate of P(tau <= T) under reflected dynamics.

    Diverged paths are dropped from the estimate (they stay in the records
    and the failure count, never in the CSV proportions).  Returns
    (HittingRow, list of HittingRecord in path-index order).
    """
    if wall not in _WALL_CHOICES:
        raise ConfigurationError(f"wall must be one of {_WALL_CHOICES}")
    if n_paths < 1:
        raise ConfigurationError("n_paths must be >= 1")
    if eta < 0:
        raise ConfigurationError("eta must be nonnegative")
    if batch_size < 1:
        raise ConfigurationError("batch_size must be >= 1")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (grid.n_cells,):
        raise ConfigurationError(
            f"x0 has shape {x0.shape}, expected ({grid.n_cells},)")
    if np.any(x0 < walls.lambda1[0]) or np.any(x0 > walls.lambda2[0]):
        raise ConfigurationError("x0 must lie between the walls at t = 0")
    records = _run_batches(x0, walls, coeff, spec, grid, n_paths,
                           master_seed, eta, batch_size)
    ok = [r for r in records if not r.failed]
    if not ok:
        raise DivergenceError("every Monte Carlo path diverged")
    n_hits = sum(math.isfinite(_selected_tau(r, wall)) for r in ok)
    lo, hi = wilson_interval(n_hits, len(ok))
    spec_eff = effective_drift_spec(spec, grid)
    cfg = _snapshot("reflected", spec, spec_eff, coeff, walls, grid,
                    derive_stream(master_seed, 0))
    cfg["eta"] = eta
    cfg["wall"] = wall
    cfg["n_paths"] = n_paths
    row = HittingRow(spec.theta, len(ok), n_hits, n_hits / len(ok), lo, hi,
                     eta, grid.T, master_seed, config_hash(cfg))
    return row, records


def exponent_sweep(thetas, x0, walls: WallPair, coeff: CoefficientSpec,
                   spec: SingularDriftSpec, grid: Grid, n_paths: int,
                   master_seed: int, eta: float = 0.0, wall: str = "either",
                   batch_size: int = 64) -> HittingTable:
    """One hitting estimate per exponent.  Sweep position i runs under seed
    master_seed + i, so a single-element sweep reproduces the standalone
    estimate at that seed."""
    thetas = list(thetas)
    if not thetas:
        raise ConfigurationError("exponent_sweep needs at least one theta")
    table = HittingTable()
    for i, theta in enumerate(thetas):
        row, records = estimate_hitting_probability(
            x0, walls, coeff, replace(spec, theta=float(theta)), grid,
            n_paths, master_seed + i, eta, wall, batch_size)
        table.rows.append(row)
        table.n_failed += sum(r.failed for r in records)
    return table


@dataclass(eq=False)
class TrendVerdict:
    """Whether estimates decrease with theta, up to interval overlap."""

    monotone: bool
    detail: str


def monotone_trend_verdict(table: HittingTable) -> TrendVerdict:
    """The estimate should not rise with the exponent: any increase between
    consecutive rows is tolerated only while their intervals overlap."""
    rows = sorted(table.rows, key=lambda r: r.theta)
    for a, b in zip(rows, rows[1:]):
        if b.p_hat > a.p_hat and b.ci_low > a.ci_high:
            return TrendVerdict(False, (
                f"p_hat rose from {a.p_hat:.3f} (theta={a.theta:g}) to "
                f"{b.p_hat:.3f} (theta={b.theta:g}) with disjoint intervals"))
    return TrendVerdict(True, "no significant increase across exponents")
