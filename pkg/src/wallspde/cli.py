"""Batch command-line front-end.

Configuration is a flat key=value file ('#' comments allowed), every key
overridable on the command line as --key=value.  Subcommands:

  validate     wall admissibility report and coefficient checks
  simulate     one trajectory (reflected, clipped, or single-wall mode)
  obstacle     deterministic obstacle solve, contraction pair, or eps schedule
  hitting      Monte Carlo exponent sweep, CSV table, trend verdict
  green-check  kernel mass/semigroup checks and power-integral exponent fits
  picard       constructive fixed-point solve with convergence history

Exit codes: 0 success, 1 runtime or validation failure, 2 usage/config error.
All outputs are deterministic given (config, seed): floats are written with
repr and JSON keys are sorted.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from pathlib import Path

import numpy as np

from .coefficients import CoefficientSpec, verify_chi_lower_bound
from .errors import WallspdeError
from .grids import CIRCLE, INTERVAL, make_grid, derive_stream
from .hitting import (detect_contact, exponent_sweep, min_gap_series,
                      monotone_trend_verdict)
from .integrators import (make_test_function, picard_solve, simulate_clipped,
                          simulate_reflected, simulate_single_wall,
                          weak_form_residual)
from .kernels import DEFAULT_KERNEL_CONFIG, dirichlet_green, kernel_matrix, \
    green_power_integral
from .obstacle import (SingularDriftSpec, complementarity_residual,
                       contraction_check, geometric_schedule, solve_obstacle)
from .output import (config_hash, save_gaps_csv, save_ledger_csv,
                     save_obstacle_csv, save_trajectory_csv,
                     write_summary_json)
from .walls import load_walls_csv, make_walls, validate_walls

__all__ = ["main"]

# exact keys with defaults; None means optional with the declared type
_DEFAULTS = {
    "domain": "circle",
    "nx": 64, "T": 1.0, "nt": 1000,
    "wall": "constant", "wall_csv": None, "h4_override": False,
    "f": "zero", "chi": "constant", "chi_lower_bound": None,
    "c1": 1.0, "c2": 1.0, "theta": 1.0,
    "eps1": 0.0, "eps2": 0.0, "floor_delta": 0.0, "floor_delta_tilde": 0.0,
    "x0": "zero", "x0_value": 0.0,
    "seed": 0, "n_paths": 100, "out": ".", "mode": "reflected",
    "gzip": False,
    "psi": "none", "psi_wavenumber": 1,
    "stop_threshold": 0.0,
    "obstacle_mode": "solve", "v": "zero", "v_rate": 2.0, "v_shift": 0.05,
    "schedule_levels": 3, "schedule_factor": 0.5, "stop_tol": 1e-4,
    "theta_list": "0.5,1,2,4,5", "eta": 0.0, "batch_size": 64,
    "wall_side": "either",
    "a_list": "2.0", "ck_t": 0.01,
    "max_iter": 12, "tol": 1e-6,
}
_TYPES = {"wall_csv": str, "chi_lower_bound": float}
_PARAM_PREFIXES = ("wall_", "f_", "chi_")


class UsageError(Exception):
    """Config or option problem: maps to exit code 2."""


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def _convert(key: str, text: str):
    proto = _DEFAULTS.get(key)
    kind = _TYPES.get(key, type(proto) if proto is not None else None)
    if kind is None:
        raise UsageError(f"unknown config key {key!r}")
    try:
        if kind is bool:
            return _parse_bool(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError:
        raise UsageError(f"bad value for {key}: {text!r}")


def _read_config_file(path: str) -> dict:
    raw = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}")
    for lineno, line in enumerate(lines, 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {body!r}")
        key, _, value = body.partition("=")
        raw[key.strip()] = value.strip()
    return raw


def _parse_overrides(tokens: list) -> dict:
    raw = {}
    for tok in tokens:
        m = re.fullmatch(r"--([A-Za-z0-9_]+)=(.*)", tok)
        if m is None:
            raise UsageError(f"unrecognized argument {tok!r} "
                             "(overrides look like --key=value)")
        raw[m.group(1)] = m.group(2)
    return raw


def _resolve_config(args, overrides: dict) -> dict:
    raw = {}
    if args.config:
        raw.update(_read_config_file(args.config))
    raw.update(overrides)
    if args.seed is not None:
        raw["seed"] = str(args.seed)
    if args.out is not None:
        raw["out"] = args.out
    if getattr(args, "mode", None):
        raw["mode"] = args.mode

    cfg = dict(_DEFAULTS)
    params = {"wall": {}, "f": {}, "chi": {}}
    for key, text in raw.items():
        if key in _DEFAULTS:
            cfg[key] = _convert(key, text)
        elif key.startswith(_PARAM_PREFIXES):
            group, _, pname = key.partition("_")
            try:
                params[group][pname] = float(text)
            except ValueError:
                raise UsageError(f"bad numeric value for {key}: {text!r}")
        else:
            raise UsageError(f"unknown config key {key!r}")
    cfg["wall_params"] = params["wall"]
    cfg["f_params"] = params["f"]
    cfg["chi_params"] = params["chi"]
    if cfg["mode"] not in ("reflected", "clipped", "single-wall"):
        raise UsageError(f"mode must be reflected|clipped|single-wall, "
                         f"got {cfg['mode']!r}")
    return cfg


def _domain_kind(cfg) -> str:
    name = cfg["domain"]
    if name in ("circle", CIRCLE):
        return CIRCLE
    if name in ("interval", INTERVAL):
        return INTERVAL
    raise UsageError(f"domain must be circle or interval, got {name!r}")


def _build(cfg: dict):
    """Construct grid, walls, coefficients, drift spec, and x0."""
    grid = make_grid(_domain_kind(cfg), cfg["nx"], cfg["T"], cfg["nt"])
    if cfg["wall_csv"]:
        walls = load_walls_csv(cfg["wall_csv"], grid)
    else:
        walls = make_walls(cfg["wall"], grid, **cfg["wall_params"])
    coeff = CoefficientSpec.from_names(
        cfg["f"], cfg["chi"], cfg["f_params"], cfg["chi_params"],
        cfg["chi_lower_bound"])
    spec = SingularDriftSpec(
        c1=cfg["c1"], c2=cfg["c2"], theta=cfg["theta"],
        eps1=cfg["eps1"], eps2=cfg["eps2"],
        floor_delta=cfg["floor_delta"],
        floor_delta_tilde=cfg["floor_delta_tilde"])
    if cfg["x0"] == "zero":
        x0 = np.zeros(grid.n_cells)
    elif cfg["x0"] == "midpoint":
        x0 = 0.5 * (walls.lambda1[0] + walls.lambda2[0])
    elif cfg["x0"] == "constant":
        x0 = np.full(grid.n_cells, cfg["x0_value"])
    else:
        raise UsageError(f"x0 must be zero|midpoint|constant, got {cfg['x0']!r}")
    return grid, walls, coeff, spec, x0


def _build_checked(cfg):
    """Objects built straight from config values: failures are usage errors."""
    try:
        return _build(cfg)
    except WallspdeError as exc:
        raise UsageError(str(exc))


def _echo(cfg: dict) -> dict:
    doc = {k: v for k, v in cfg.items() if v is not None}
    return doc


def _out_dir(cfg) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_validate(cfg) -> int:
    grid, walls, coeff, spec, x0 = _build_checked(cfg)
    report = validate_walls(walls, grid, h4_override=cfg["h4_override"])
    for line in report.lines():
        print(line)
    ok = report.ok()
    if cfg["chi_lower_bound"] is not None:
        states = np.linspace(walls.lambda1[0].min(), walls.lambda2[0].max(), 7)
        bound_ok = verify_chi_lower_bound(coeff, grid.x_coords, states)
        print(f"chi lower bound: {'pass' if bound_ok else 'fail'} "
              f"(|chi| >= {cfg['chi_lower_bound']:g} on samples)")
        ok = ok and bound_ok
    print(f"walls: {walls.name or walls.provenance}, "
          f"grid: {grid.domain_kind} nx={grid.nx} nt={grid.nt}")
    return 0 if ok else 1


def cmd_simulate(cfg) -> int:
    grid, walls, coeff, spec, x0 = _build_checked(cfg)
    validate_walls(walls, grid, h4_override=cfg["h4_override"])
    stream = derive_stream(cfg["seed"], 0)
    mode = cfg["mode"]
    if mode == "reflected":
        path = simulate_reflected(x0, walls, coeff, spec, grid, stream)
    elif mode == "clipped":
        path = simulate_clipped(x0, walls, coeff, spec, grid, stream)
    else:
        path = simulate_single_wall(x0, walls, coeff, spec, grid, stream,
                                    stop_threshold=cfg["stop_threshold"])
    out = _out_dir(cfg)
    suffix = ".csv.gz" if cfg["gzip"] else ".csv"
    traj = out / f"trajectory{suffix}"
    save_trajectory_csv(path, traj, gzip_output=cfg["gzip"])
    save_gaps_csv(path, out / f"gaps{suffix}", gzip_output=cfg["gzip"])

    gl, gu = min_gap_series(path)
    up_total, down_total = path.ledger.totals()
    r1, r2 = complementarity_residual(path.X, walls, path.ledger)
    rec = detect_contact(path, eta=cfg["eta"])
    results = {
        "min_gap_lower": float(gl.min()), "min_gap_upper": float(gu.min()),
        "upsilon_total": up_total, "gamma_total": down_total,
        "complementarity_r1": r1, "complementarity_r2": r2,
        "wall_hit": rec.wall_hit,
        "tau1": None if math.isinf(rec.tau1) else rec.tau1,
        "tau2": None if math.isinf(rec.tau2) else rec.tau2,
        "tau": None if math.isinf(rec.tau) else rec.tau,
        "stop_step": path.stop_step,
        "stop_time": path.stop_time,
    }
    if cfg["psi"] != "none":
        psi = make_test_function(cfg["psi"], grid, cfg["psi_wavenumber"])
        results["weak_residual"] = weak_form_residual(
            path, psi, coeff, spec, grid)
    write_summary_json(_echo(cfg), results, out / "summary.json")
    print(f"mode={mode} min gap lower={float(gl.min())!r} "
          f"upper={float(gu.min())!r}")
    print(f"ledger mass upsilon={up_total!r} gamma={down_total!r}")
    if path.stop_step is not None:
        print(f"stopped at step {path.stop_step} (t={path.stop_time!r})")
    if "weak_residual" in results:
        print(f"weak-form residual ({cfg['psi']}): {results['weak_residual']!r}")
    print(f"wrote {traj} and {out / 'summary.json'}")
    return 0


def _driver_field(cfg, grid, x0):
    t = grid.times[:, None]
    if cfg["v"] == "zero":
        return x0[None, :] + 0.0 * t
    if cfg["v"] == "rise":
        return x0[None, :] + cfg["v_rate"] * t
    if cfg["v"] == "sine_rise":
        shape = np.sin(2.0 * np.pi * grid.x_coords) if grid.is_circle() \
            else np.sin(np.pi * grid.x_coords)
        return x0[None, :] + cfg["v_rate"] * t * shape[None, :]
    raise UsageError(f"v must be zero|rise|sine_rise, got {cfg['v']!r}")


def cmd_obstacle(cfg) -> int:
    grid, walls, coeff, spec, x0 = _build_checked(cfg)
    validate_walls(walls, grid, h4_override=cfg["h4_override"])
    v = _driver_field(cfg, grid, x0)
    out = _out_dir(cfg)
    mode = cfg["obstacle_mode"]
    if mode == "contraction":
        ramp = (grid.times / grid.T)[:, None]
        v_hat = v + cfg["v_shift"] * ramp
        res = contraction_check(v, v_hat, walls, spec, grid)
        print(f"contraction lhs={res.lhs!r} rhs={res.rhs!r} "
              f"pass={res.passed}")
        return 0 if res.passed else 1
    schedule = None
    if mode == "schedule":
        schedule = geometric_schedule(spec.eps1, spec.eps2,
                                      cfg["schedule_levels"],
                                      cfg["schedule_factor"])
    elif mode != "solve":
        raise UsageError(
            f"obstacle_mode must be solve|contraction|schedule, got {mode!r}")
    sol = solve_obstacle(v, walls, spec, grid, schedule=schedule,
                         stop_tol=cfg["stop_tol"])
    save_obstacle_csv(sol.xi, grid, out / "xi.csv")
    save_ledger_csv(sol.ledger, grid, out / "ledger.csv")
    r1, r2 = complementarity_residual(sol.xi + v, walls, sol.ledger)
    print(f"complementarity r1={r1!r} r2={r2!r}")
    results = {"complementarity_r1": r1, "complementarity_r2": r2,
               "levels": len(sol.levels)}
    if mode == "schedule":
        print(f"levels run: {len(sol.levels)}")
        print(f"xi monotone in eps: {sol.xi_monotone_in_eps}; "
              f"shifted monotone: {sol.shifted_monotone_in_eps} "
              f"(worst violation {sol.monotone_violation!r})")
        results["xi_monotone_in_eps"] = sol.xi_monotone_in_eps
        results["shifted_monotone_in_eps"] = sol.shifted_monotone_in_eps
        results["monotone_violation"] = sol.monotone_violation
    write_summary_json(_echo(cfg), results, out / "obstacle_summary.json")
    print(f"wrote {out / 'xi.csv'} and {out / 'ledger.csv'}")
    return 0


def cmd_hitting(cfg) -> int:
    grid, walls, coeff, spec, x0 = _build_checked(cfg)
    validate_walls(walls, grid, h4_override=cfg["h4_override"])
    try:
        thetas = [float(v) for v in cfg["theta_list"].split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad theta_list: {cfg['theta_list']!r}")
    if not thetas:
        raise UsageError("theta_list is empty")
    table = exponent_sweep(thetas, x0, walls, coeff, spec, grid,
                           cfg["n_paths"], cfg["seed"], eta=cfg["eta"],
                           wall=cfg["wall_side"], batch_size=cfg["batch_size"])
    out = _out_dir(cfg)
    table.to_csv(out / "hitting.csv")
    for row in table.rows:
        print(f"theta={row.theta:g} p_hat={row.p_hat!r} "
              f"ci=[{row.ci_low!r}, {row.ci_high!r}] n={row.n_paths}")
    if table.n_failed:
        print(f"excluded {table.n_failed} diverged path(s)")
    verdict = monotone_trend_verdict(table)
    print(f"trend: {'monotone' if verdict.monotone else 'NOT monotone'} "
          f"({verdict.detail})")
    print(f"wrote {out / 'hitting.csv'}")
    return 0


def cmd_green_check(cfg) -> int:
    try:
        a_values = [float(v) for v in cfg["a_list"].split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad a_list: {cfg['a_list']!r}")
    if not a_values:
        raise UsageError("a_list is empty")
    for a in a_values:
        if not 1.0 < a < 3.0:
            raise UsageError(f"power integral needs a in (1, 3), got a={a:g}")
    nx = cfg["nx"]
    circle = make_grid(CIRCLE, nx, cfg["T"], cfg["nt"])
    kcfg = DEFAULT_KERNEL_CONFIG

    worst_mass = 0.0
    for t in (1e-4, 1e-2, 1.0):
        mass = kernel_matrix(circle, t, kcfg).sum(axis=1)
        err = float(np.max(np.abs(mass - 1.0)))
        worst_mass = max(worst_mass, err)
        print(f"circle mass error at t={t:g}: {err:.3e}")

    t = cfg["ck_t"]
    half = kernel_matrix(circle, t, kcfg)
    err_ck = float(np.max(np.abs(half @ half - kernel_matrix(circle, 2 * t, kcfg))))
    print(f"semigroup (Chapman-Kolmogorov) error at t={t:g}: {err_ck:.3e}")

    interval = make_grid(INTERVAL, nx, cfg["T"], cfg["nt"])
    x = interval.x_coords
    worst_eig = 0.0
    for k in (1, 2, 3):
        mode = np.sin(k * math.pi * x)
        prop = kernel_matrix(interval, t, kcfg) @ mode
        err = float(np.max(np.abs(prop - math.exp(-k * k * math.pi ** 2 * t) * mode)))
        worst_eig = max(worst_eig, err)
        print(f"interval mode k={k} decay error at t={t:g}: {err:.3e}")

    ts = np.logspace(-3, -1, 7)
    for a in a_values:
        slopes = []
        for factor in (1, 2):
            g = make_grid(CIRCLE, nx * factor, cfg["T"], cfg["nt"])
            vals = [green_power_integral(a, float(tv), g, kcfg) for tv in ts]
            slope = float(np.polyfit(np.log(ts), np.log(vals), 1)[0])
            slopes.append(slope)
        std_exp = 0.5 * (3.0 - a)
        alt_exp = 0.5 * (3.0 * a - 1.0)
        print(f"a={a:g}: fitted exponent {slopes[0]:.4f} (nx={nx}), "
              f"{slopes[1]:.4f} (nx={2 * nx}); candidates "
              f"(3-a)/2={std_exp:g} vs (3a-1)/2={alt_exp:g}")
        print(f"a={a:g}: |fit-(3-a)/2|={abs(slopes[0] - std_exp):.3e}, "
              f"|fit-(3a-1)/2|={abs(slopes[0] - alt_exp):.3e}")
    if worst_mass > 1e-6:
        print("kernel mass check FAILED", file=sys.stderr)
        return 1
    return 0


def cmd_picard(cfg) -> int:
    grid, walls, coeff, spec, x0 = _build_checked(cfg)
    validate_walls(walls, grid, h4_override=cfg["h4_override"])
    stream = derive_stream(cfg["seed"], 0)
    path, state = picard_solve(x0, walls, coeff, spec, grid, stream,
                               max_iter=cfg["max_iter"], tol=cfg["tol"])
    out = _out_dir(cfg)
    save_trajectory_csv(path, out / "trajectory.csv", gzip_output=cfg["gzip"])
    results = {
        "iterations": state.n_iter,
        "converged": state.converged,
        "history": [float(h) for h in state.history],
    }
    write_summary_json(_echo(cfg), results, out / "summary.json")
    print(f"iterations={state.n_iter} converged={state.converged}")
    print("sup-distance history: "
          + ", ".join(repr(float(h)) for h in state.history))
    if not state.converged:
        print("did not converge within max_iter (reported, not fatal)")
    print(f"wrote {out / 'trajectory.csv'} and {out / 'summary.json'}")
    return 0


_COMMANDS = {
    "validate": cmd_validate,
    "simulate": cmd_simulate,
    "obstacle": cmd_obstacle,
    "hitting": cmd_hitting,
    "green-check": cmd_green_check,
    "picard": cmd_picard,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wallspde",
        description="Reflected stochastic heat equation laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key=value config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        if name in ("simulate",):
            p.add_argument("--mode", default=None,
                           choices=["reflected", "clipped", "single-wall"])
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        overrides = _parse_overrides(extra)
        cfg = _resolve_config(args, overrides)
    except UsageError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except WallspdeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
