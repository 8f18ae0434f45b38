"""Command-line surface: exit codes, files on disk, override precedence."""

import gzip
import json
from pathlib import Path

import pytest

from wallspde.cli import main
from wallspde.grids import make_grid
from wallspde.walls import make_walls, save_walls_csv

# keep every smoke run tiny; the physics is tested elsewhere
SMALL = ("--nx=8", "--T=0.05", "--nt=10")


def run(capsys, *args):
    rc = main(list(args))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


# ---------------------------------------------------------------- exit code 2

@pytest.mark.parametrize("argv", [
    ["simulate", "--bogus=1"],
    ["simulate", "--nx=abc"],
    ["simulate", "--gzip=maybe"],
    ["simulate", "--x0=weird"],
    ["simulate", "--nx"],  # overrides must be --key=value
    ["validate", "--wall=csv", "--wall_csv=no_such_file.csv"],
    ["green-check", "--a_list=0.5"],
    ["green-check", "--a_list=2,abc"],
    ["hitting", "--theta_list=,"],
    ["hitting", "--theta_list=0.5,abc"],
])
def test_usage_errors_exit_2(capsys, argv):
    rc, _, err = run(capsys, *argv)
    assert rc == 2
    assert err.startswith("config error:")


def test_config_file_errors_exit_2(tmp_path, capsys):
    rc, _, err = run(capsys, "simulate", "--config", str(tmp_path / "nope.cfg"))
    assert rc == 2 and "cannot read config file" in err

    bad = tmp_path / "bad.cfg"
    bad.write_text("nx 8\n")
    rc, _, err = run(capsys, "simulate", "--config", str(bad))
    assert rc == 2 and "expected key=value" in err

    unknown = tmp_path / "unknown.cfg"
    unknown.write_text("bogus=1\n")
    rc, _, err = run(capsys, "simulate", "--config", str(unknown))
    assert rc == 2 and "unknown config key" in err

    mode = tmp_path / "mode.cfg"
    mode.write_text("mode=bogus\n")
    rc, _, err = run(capsys, "simulate", "--config", str(mode))
    assert rc == 2 and "reflected|clipped|single-wall" in err


def test_bare_invocation_is_an_argparse_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


# ---------------------------------------------------------------- exit code 1

def test_crossed_walls_exit_1(capsys):
    rc, _, err = run(capsys, "validate", "--wall_lambda1=2.0", "--wall_lambda2=1.0")
    assert rc == 1
    assert err.startswith("error:") and "H1 violated" in err


def test_singular_drift_without_regularization_exit_1(capsys):
    # theta defaults to 1 with c1=c2=1: needs eps or a floor
    rc, _, err = run(capsys, "obstacle", *SMALL, "--v=rise",
                     "--wall_lambda1=-0.5", "--wall_lambda2=0.5")
    assert rc == 1 and "eps1 or floor_delta" in err


def test_hitting_rejects_unknown_wall_side(capsys):
    rc, _, err = run(capsys, "hitting", *SMALL, "--wall_side=bogus",
                     "--theta_list=0.5", "--n_paths=2")
    assert rc == 1 and "wall must be one of" in err


# ------------------------------------------------------------------- validate

def test_validate_circle_skips_endpoint_checks(capsys):
    rc, out, _ = run(capsys, "validate")
    assert rc == 0
    assert "H1: pass" in out
    assert "H0: skipped" in out and "H3: skipped" in out


def test_validate_interval_checks_endpoints(capsys):
    rc, out, _ = run(capsys, "validate", "--domain=interval_dirichlet", *SMALL)
    assert rc == 0
    assert "H0: pass" in out and "H3: pass" in out


def test_validate_chi_lower_bound_gate(capsys):
    rc, out, _ = run(capsys, "validate", "--chi_value=0.6", "--chi_lower_bound=0.5")
    assert rc == 0 and "chi lower bound: pass" in out

    rc, out, _ = run(capsys, "validate", "--chi_value=0.3", "--chi_lower_bound=0.5")
    assert rc == 1 and "chi lower bound: fail" in out


def test_validate_accepts_tabulated_walls(tmp_path, capsys):
    grid = make_grid("circle", nx=8, T=0.05, nt=10)
    walls = make_walls("constant", grid, lambda1=-0.7, lambda2=0.9)
    path = tmp_path / "walls.csv"
    save_walls_csv(walls, grid, path)
    rc, out, _ = run(capsys, "validate", *SMALL,
                     "--wall=csv", f"--wall_csv={path}")
    assert rc == 0
    assert "walls: csv" in out


# ------------------------------------------------------------------- simulate

def test_simulate_writes_expected_files(tmp_path, capsys):
    out_dir = tmp_path / "run"
    rc, out, _ = run(capsys, "simulate", *SMALL, "--seed=2", f"--out={out_dir}")
    assert rc == 0
    assert sorted(p.name for p in out_dir.iterdir()) == \
        ["gaps.csv", "summary.json", "trajectory.csv"]
    assert (out_dir / "trajectory.csv").read_text().splitlines()[0] == \
        "step,t,cell,x,X,upsilon_mass,gamma_mass"
    assert (out_dir / "gaps.csv").read_text().splitlines()[0] == \
        "step,t,gap_lower,gap_upper"

    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["config"]["nx"] == 8 and summary["config"]["seed"] == 2
    res = summary["results"]
    assert res["min_gap_lower"] > 0.0 and res["min_gap_upper"] > 0.0
    assert res["upsilon_total"] == 0.0 and res["gamma_total"] == 0.0
    assert "mode=reflected" in out


def test_simulate_rerun_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for out_dir in (a, b):
        rc, _, _ = run(capsys, "simulate", *SMALL, "--seed=2", f"--out={out_dir}")
        assert rc == 0
    for name in ("trajectory.csv", "gaps.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_simulate_gzip_decompresses_to_plain_output(tmp_path, capsys):
    plain, packed = tmp_path / "plain", tmp_path / "gz"
    run(capsys, "simulate", *SMALL, "--seed=2", f"--out={plain}")
    rc, _, _ = run(capsys, "simulate", *SMALL, "--seed=2", "--gzip=true",
                   f"--out={packed}")
    assert rc == 0
    assert sorted(p.name for p in packed.iterdir()) == \
        ["gaps.csv.gz", "summary.json", "trajectory.csv.gz"]
    for name in ("trajectory.csv", "gaps.csv"):
        raw = gzip.decompress((packed / (name + ".gz")).read_bytes())
        assert raw == (plain / name).read_bytes()


def test_cli_overrides_beat_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("nx=8\nseed=1\nT=0.05\nnt=10\n# comment\n")
    out_dir = tmp_path / "run"
    rc, _, _ = run(capsys, "simulate", "--config", str(cfg),
                   "--seed", "9", "--nx=12", f"--out={out_dir}")
    assert rc == 0
    echoed = json.loads((out_dir / "summary.json").read_text())["config"]
    assert echoed["nx"] == 12  # --key=value override
    assert echoed["seed"] == 9  # named flag
    assert echoed["nt"] == 10  # from the file


def test_simulate_reports_weak_residual_when_asked(tmp_path, capsys):
    rc, out, _ = run(capsys, "simulate", *SMALL, "--psi=bump",
                     f"--out={tmp_path}")
    assert rc == 0
    res = json.loads((tmp_path / "summary.json").read_text())["results"]
    assert 0.0 < res["weak_residual"] < 0.1
    assert "weak-form residual (bump)" in out


def test_single_wall_stop_is_recorded(tmp_path, capsys):
    rc, out, _ = run(capsys, "simulate", *SMALL, "--mode=single-wall",
                     "--theta=2", "--eps1=0.1", "--c1=0.5", "--c2=0.0",
                     "--wall_lambda1=-0.5", "--wall_lambda2=1e9",
                     "--stop_threshold=0.01", f"--out={tmp_path}")
    assert rc == 0
    res = json.loads((tmp_path / "summary.json").read_text())["results"]
    assert res["stop_step"] == 2
    assert res["stop_time"] == pytest.approx(0.01)
    assert "stopped at step 2" in out


# ------------------------------------------------------------------- obstacle

OBSTACLE = SMALL + ("--eps1=0.1", "--eps2=0.1", "--theta=2",
                    "--wall_lambda1=-0.5", "--wall_lambda2=0.5")


def test_obstacle_solve_writes_expected_files(tmp_path, capsys):
    rc, out, _ = run(capsys, "obstacle", *OBSTACLE, "--v=rise",
                     f"--out={tmp_path}")
    assert rc == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == \
        ["ledger.csv", "obstacle_summary.json", "xi.csv"]
    assert (tmp_path / "xi.csv").read_text().splitlines()[0] == \
        "step,t,cell,x,xi"
    res = json.loads((tmp_path / "obstacle_summary.json").read_text())["results"]
    assert res["complementarity_r1"] == 0.0
    assert res["complementarity_r2"] == 0.0
    assert "complementarity r1=0.0 r2=0.0" in out


def test_obstacle_contraction_mode_writes_nothing(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    rc, out, _ = run(capsys, "obstacle", *OBSTACLE,
                     "--obstacle_mode=contraction")
    assert rc == 0
    assert "pass=True" in out
    assert list(tmp_path.iterdir()) == []


def test_obstacle_schedule_reports_monotonicity(tmp_path, capsys):
    rc, out, _ = run(capsys, "obstacle", *OBSTACLE, "--v=rise",
                     "--obstacle_mode=schedule", f"--out={tmp_path}")
    assert rc == 0
    assert "levels run: 3" in out
    assert "shifted monotone: True" in out
    assert (tmp_path / "xi.csv").exists() and (tmp_path / "ledger.csv").exists()


# -------------------------------------------------------------------- hitting

def test_hitting_writes_table_and_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for out_dir in (a, b):
        # empty list entries are skipped, so this sweeps two exponents
        rc, out, _ = run(capsys, "hitting", *SMALL, "--theta_list=0.5,,2",
                         "--n_paths=5", "--seed=4",
                         "--wall_lambda1=-0.1", "--wall_lambda2=0.1",
                         f"--out={out_dir}")
        assert rc == 0
    lines = (a / "hitting.csv").read_text().splitlines()
    assert lines[0] == ("theta,n_paths,n_hits,p_hat,ci_low,ci_high,"
                        "eta,T,seed,config_hash")
    assert len(lines) == 3
    assert lines[1].startswith("0.5,5,") and lines[2].startswith("2.0,5,")
    assert (a / "hitting.csv").read_bytes() == (b / "hitting.csv").read_bytes()
    assert "trend:" in out


# ---------------------------------------------------------- green-check et al

def test_green_check_reports_both_exponent_candidates(capsys):
    rc, out, _ = run(capsys, "green-check", "--nx=64", "--T=1.0", "--nt=10")
    assert rc == 0
    assert "circle mass error" in out
    assert "Chapman-Kolmogorov" in out
    assert "(3-a)/2" in out and "(3a-1)/2" in out


def test_picard_writes_history(tmp_path, capsys):
    rc, out, _ = run(capsys, "picard", *SMALL, "--f=sin_state",
                     "--eps1=0.1", "--eps2=0.1", "--theta=2", "--seed=3",
                     f"--out={tmp_path}")
    assert rc == 0
    assert (tmp_path / "trajectory.csv").exists()
    res = json.loads((tmp_path / "summary.json").read_text())["results"]
    assert res["converged"] is True
    assert res["iterations"] == 4
    history = res["history"]
    assert all(b < a for a, b in zip(history, history[1:]))
    assert history[1] < 0.01
    assert "converged=True" in out
