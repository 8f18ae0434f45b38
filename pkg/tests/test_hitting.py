"""Contact detection and Monte Carlo hitting estimates."""

import math

import numpy as np
import pytest

from wallspde.errors import ConfigurationError, DivergenceError
from wallspde.grids import derive_stream, make_grid
from wallspde.hitting import (HITTING_CSV_HEADER, HittingRow, HittingTable,
                              detect_contact, estimate_hitting_probability,
                              exponent_sweep, min_gap_series,
                              monotone_trend_verdict, wilson_interval)
from wallspde.integrators import SolutionPath, simulate_reflected
from wallspde.obstacle import ReflectionLedger, SingularDriftSpec
from wallspde.walls import make_walls
from wallspde.coefficients import CoefficientSpec

from conftest import coeff_noise, coeff_zero, drift_off, small_grid


# ------------------------------------------------------------------- wilson

def test_wilson_interval_matches_closed_form():
    z = 1.959963984540054
    p, n = 0.3, 10
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo, hi = wilson_interval(3, 10)
    assert lo == pytest.approx(center - half, rel=1e-12)
    assert hi == pytest.approx(center + half, rel=1e-12)


def test_wilson_interval_edges_and_validation():
    lo, hi = wilson_interval(0, 10)
    assert lo == 0.0
    assert 0.2 < hi < 0.35  # zero hits still leave real upside uncertainty
    lo, hi = wilson_interval(10, 10)
    assert hi == pytest.approx(1.0, abs=1e-12)
    assert 0.65 < lo < 0.8
    with pytest.raises(ConfigurationError):
        wilson_interval(3, 0)
    with pytest.raises(ConfigurationError):
        wilson_interval(11, 10)


# --------------------------------------------------------- contact scanning

def synthetic_path(grid, walls, X, mode="clipped", ledger=None):
    if ledger is None:
        ledger = ReflectionLedger.zeros(grid.nt, grid.n_cells)
    return SolutionPath(X, ledger, np.zeros((grid.nt, grid.n_cells)), grid,
                        walls, mode, master_seed=0, path_index=3)


def test_min_gap_series_constant_and_squeeze():
    g = small_grid(nx=8, nt=4)
    w = make_walls("constant", g, lambda1=-1.0, lambda2=1.0)
    X = np.full((g.nt + 1, g.n_cells), 0.25)
    gl, gu = min_gap_series(synthetic_path(g, w, X))
    np.testing.assert_allclose(gl, 1.25)
    np.testing.assert_allclose(gu, 0.75)
    # one cell drifts toward the upper wall: only gu shrinks
    X2 = X.copy()
    X2[:, 3] = 0.25 + 0.15 * np.arange(g.nt + 1)
    gl2, gu2 = min_gap_series(synthetic_path(g, w, X2))
    np.testing.assert_allclose(gl2, 1.25)
    np.testing.assert_allclose(gu2, 0.75 - 0.15 * np.arange(g.nt + 1))


def test_detect_contact_interior_path():
    g = small_grid(nx=8, nt=10)
    w = make_walls("constant", g, lambda1=-1.0, lambda2=1.0)
    rec = detect_contact(synthetic_path(g, w, np.zeros((g.nt + 1, g.n_cells))))
    assert rec.wall_hit == "none"
    assert math.isinf(rec.tau1) and math.isinf(rec.tau2)
    assert math.isinf(rec.tau)
    assert rec.min_gap_lower == 1.0
    assert rec.min_gap_upper == 1.0
    assert rec.path_index == 3


def test_detect_contact_from_booked_mass_only():
    # the recorded states stay inside the band; only the ledger knows the
    # projection fired at step 7, and only reflected mode may consult it
    g = small_grid(nx=8, nt=10)
    w = make_walls("constant", g, lambda1=-1.0, lambda2=1.0)
    X = np.zeros((g.nt + 1, g.n_cells))
    led = ReflectionLedger.zeros(g.nt, g.n_cells)
    led.gamma_mass[7, 2] = 1e-3
    rec = detect_contact(synthetic_path(g, w, X, mode="reflected", ledger=led))
    assert rec.wall_hit == "upper"
    assert rec.tau2 == pytest.approx(7 * g.dt)
    assert math.isinf(rec.tau1)
    assert rec.tau == rec.tau2
    # same data in clipped mode: the ledger is not evidence of contact
    rec2 = detect_contact(synthetic_path(g, w, X, mode="clipped", ledger=led))
    assert rec2.wall_hit == "none"


def test_detect_contact_eta_threshold_skips_time_zero():
    # eta equal to the standing gap: every step qualifies, but contact only
    # counts strictly after t = 0
    g = small_grid(nx=8, nt=10)
    w = make_walls("constant", g, lambda1=-0.5, lambda2=0.5)
    X = np.zeros((g.nt + 1, g.n_cells))
    rec = detect_contact(synthetic_path(g, w, X), eta=0.5)
    assert rec.wall_hit == "both"
    assert rec.tau1 == pytest.approx(g.dt)
    assert rec.tau2 == pytest.approx(g.dt)
    with pytest.raises(ConfigurationError):
        detect_contact(synthetic_path(g, w, X), eta=-0.1)


def test_detect_contact_on_simulated_tight_walls():
    g = small_grid(nx=16, nt=100)
    w = make_walls("constant", g, lambda1=-0.02, lambda2=0.02)
    path = simulate_reflected(np.zeros(g.n_cells), w, coeff_noise(),
                              drift_off(), g, derive_stream(9, 0))
    rec = detect_contact(path)
    assert rec.wall_hit == "both"  # unit noise slams both walls immediately
    assert rec.tau == pytest.approx(g.dt)


# ------------------------------------------------------------- CSV contract

def test_csv_header_and_line():
    assert HITTING_CSV_HEADER == ("theta,n_paths,n_hits,p_hat,ci_low,ci_high,"
                                  "eta,T,seed,config_hash")
    row = HittingRow(theta=2.0, n_paths=100, n_hits=38, p_hat=0.38,
                     ci_low=0.29, ci_high=0.48, eta=0.0, T=1.0, seed=5,
                     config_hash="0123456789abcdef")
    assert row.csv_line() == "2.0,100,38,0.38,0.29,0.48,0.0,1.0,5,0123456789abcdef"


def test_table_to_csv_round_trip(tmp_path):
    row = HittingRow(0.5, 10, 9, 0.9, 0.59, 0.98, 0.0, 1.0, 100, "deadbeef")
    table = HittingTable(rows=[row])
    p = tmp_path / "hits.csv"
    table.to_csv(str(p))
    lines = p.read_text().splitlines()
    assert lines[0] == HITTING_CSV_HEADER
    assert lines[1] == row.csv_line()
    np.testing.assert_allclose(table.p_hats(), [0.9])


# ---------------------------------------------------------------- estimates

def test_near_touch_walls_hit_with_certainty():
    g = make_grid("interval_dirichlet", 16, 0.1, 100)
    w = make_walls("constant", g, lambda1=-0.01, lambda2=0.01)
    row, records = estimate_hitting_probability(
        np.zeros(g.n_cells), w, coeff_noise(), drift_off(), g, 100, 31)
    assert row.p_hat >= 0.99
    assert row.n_paths == 100
    assert len(records) == 100
    assert all(not r.failed for r in records)


def test_quiet_symmetric_repulsion_never_hits():
    # chi = 0 and the two singular terms cancel exactly at the midline
    g = make_grid("interval_dirichlet", 16, 0.1, 100)
    w = make_walls("constant", g, lambda1=-1.0, lambda2=1.0)
    spec = SingularDriftSpec(c1=1.0, c2=1.0, theta=2.0)
    row, _ = estimate_hitting_probability(
        np.zeros(g.n_cells), w, coeff_zero(), spec, g, 20, 31)
    assert row.p_hat == 0.0
    assert row.n_hits == 0
    assert row.ci_low == 0.0


def test_wall_selector():
    g = make_grid("interval_dirichlet", 16, 0.1, 100)
    w = make_walls("constant", g, lambda1=-1e9, lambda2=0.01)
    got = {}
    for which in ("lower", "upper", "either"):
        r, _ = estimate_hitting_probability(
            np.zeros(g.n_cells), w, coeff_noise(), drift_off(), g, 50, 31,
            wall=which)
        got[which] = r.p_hat
    assert got == {"lower": 0.0, "upper": 1.0, "either": 1.0}


def test_estimate_deterministic_and_batch_invariant():
    g = small_grid(nx=16, nt=100)
    w = make_walls("constant", g, lambda1=-0.1, lambda2=0.1)
    args = (np.zeros(g.n_cells), w, coeff_noise(), drift_off(), g, 30, 77)
    row_a, rec_a = estimate_hitting_probability(*args)
    row_b, rec_b = estimate_hitting_probability(*args)
    assert row_a.csv_line() == row_b.csv_line()
    row_c, rec_c = estimate_hitting_probability(*args, batch_size=7)
    assert row_a.csv_line() == row_c.csv_line()
    for ra, rc in zip(rec_a, rec_c):
        assert ra.tau == rc.tau
        assert ra.min_gap_lower == rc.min_gap_lower
        assert ra.min_gap_upper == rc.min_gap_upper


def test_estimate_validation():
    g = small_grid(nx=8, nt=10)
    w = make_walls("constant", g)
    x0 = np.zeros(g.n_cells)
    base = dict(n_paths=4, master_seed=0)
    with pytest.raises(ConfigurationError):
        estimate_hitting_probability(x0, w, coeff_zero(), drift_off(), g,
                                     wall="sideways", **base)
    with pytest.raises(ConfigurationError):
        estimate_hitting_probability(x0, w, coeff_zero(), drift_off(), g,
                                     n_paths=0, master_seed=0)
    with pytest.raises(ConfigurationError):
        estimate_hitting_probability(x0, w, coeff_zero(), drift_off(), g,
                                     eta=-1.0, **base)
    with pytest.raises(ConfigurationError):
        estimate_hitting_probability(x0[:-1], w, coeff_zero(), drift_off(), g,
                                     **base)
    with pytest.raises(ConfigurationError):
        estimate_hitting_probability(x0 + 5.0, w, coeff_zero(), drift_off(),
                                     g, **base)


def test_all_paths_diverging_raises():
    g = small_grid(nx=8, nt=10)
    w = make_walls("constant", g)
    coeff = CoefficientSpec.from_names("constant", "zero", {"value": 1e12})
    with pytest.raises(DivergenceError):
        estimate_hitting_probability(np.zeros(g.n_cells), w, coeff,
                                     drift_off(), g, 4, 0)


# -------------------------------------------------------------------- sweep

def test_sweep_positions_reproduce_standalone_estimates():
    g = small_grid(nx=16, nt=100)
    w = make_walls("constant", g, lambda1=-0.1, lambda2=0.1)
    spec = SingularDriftSpec(c1=1.0, c2=1.0, theta=1.0, eps1=0.1, eps2=0.1)
    table = exponent_sweep([0.5, 2.0], np.zeros(g.n_cells), w, coeff_noise(),
                           spec, g, 20, 50)
    assert [r.theta for r in table.rows] == [0.5, 2.0]
    from dataclasses import replace
    for i, theta in enumerate([0.5, 2.0]):
        row, _ = estimate_hitting_probability(
            np.zeros(g.n_cells), w, coeff_noise(),
            replace(spec, theta=theta), g, 20, 50 + i)
        assert table.rows[i].csv_line() == row.csv_line()
    with pytest.raises(ConfigurationError):
        exponent_sweep([], np.zeros(g.n_cells), w, coeff_noise(), spec, g,
                       20, 50)


def _row(theta, p_hat, lo, hi):
    return HittingRow(theta, 100, int(round(100 * p_hat)), p_hat, lo, hi,
                      0.0, 1.0, 0, "cafe")


def test_trend_verdict():
    falls = HittingTable(rows=[_row(0.5, 0.9, 0.82, 0.95),
                               _row(2.0, 0.4, 0.31, 0.50),
                               _row(4.0, 0.0, 0.00, 0.04)])
    assert monotone_trend_verdict(falls).monotone

    wiggles = HittingTable(rows=[_row(0.5, 0.50, 0.40, 0.60),
                                 _row(2.0, 0.55, 0.45, 0.65),  # overlaps
                                 _row(4.0, 0.10, 0.05, 0.18)])
    assert monotone_trend_verdict(wiggles).monotone

    rises = HittingTable(rows=[_row(0.5, 0.10, 0.05, 0.18),
                               _row(2.0, 0.60, 0.50, 0.70)])
    verdict = monotone_trend_verdict(rises)
    assert not verdict.monotone
    assert "rose" in verdict.detail
    # order of the input rows must not matter
    shuffled = HittingTable(rows=list(reversed(rises.rows)))
    assert not monotone_trend_verdict(shuffled).monotone
