"""Reproducible file output: hashing, CSV schemas, gzip byte identity."""

import gzip
import json

import numpy as np
import pytest

from wallspde.errors import ConfigurationError
from wallspde.grids import derive_stream
from wallspde.integrators import simulate_reflected
from wallspde.output import (config_hash, save_gaps_csv, save_ledger_csv,
                             save_obstacle_csv, save_trajectory_csv,
                             write_summary_json)
from wallspde.walls import make_walls

from conftest import coeff_noise, drift_off, small_grid


def tight_path(seed=0):
    g = small_grid(nx=8, nt=10)
    w = make_walls("constant", g, lambda1=-0.05, lambda2=0.05)
    return simulate_reflected(np.zeros(g.n_cells), w, coeff_noise(),
                              drift_off(), g, derive_stream(seed, 0)), g


# ---------------------------------------------------------------- hashing

def test_config_hash_is_order_invariant():
    a = {"nx": 64, "mode": "reflected", "theta": 2.0}
    b = {"theta": 2.0, "nx": 64, "mode": "reflected"}
    assert config_hash(a) == config_hash(b)
    assert len(config_hash(a)) == 12
    assert all(c in "0123456789abcdef" for c in config_hash(a))
    assert config_hash(a) != config_hash({**a, "nx": 65})


def test_config_hash_handles_numpy_scalars_and_arrays():
    a = {"dt": np.float64(0.5), "nx": np.int64(8), "x0": np.zeros(3)}
    b = {"dt": 0.5, "nx": 8, "x0": [0.0, 0.0, 0.0]}
    assert config_hash(a) == config_hash(b)
    with pytest.raises(TypeError):
        config_hash({"bad": object()})


# ------------------------------------------------------------ CSV schemas

def test_trajectory_csv_schema(tmp_path):
    path, g = tight_path()
    f = tmp_path / "traj.csv"
    save_trajectory_csv(path, str(f))
    lines = f.read_text().splitlines()
    assert lines[0] == "step,t,cell,x,X,upsilon_mass,gamma_mass"
    assert len(lines) == 1 + (g.nt + 1) * g.n_cells
    first = lines[1].split(",")
    assert first[0] == "0" and first[2] == "0"
    # values round-trip through repr exactly
    assert float(first[4]) == path.X[0, 0]
    last = lines[-1].split(",")
    assert int(last[0]) == g.nt
    assert float(last[4]) == path.X[g.nt, g.n_cells - 1]


def test_gaps_csv_schema(tmp_path):
    path, g = tight_path()
    f = tmp_path / "gaps.csv"
    save_gaps_csv(path, str(f))
    lines = f.read_text().splitlines()
    assert lines[0] == "step,t,gap_lower,gap_upper"
    assert len(lines) == 1 + (g.nt + 1)
    row = lines[3].split(",")
    gl = float(np.min(path.X[2] - path.walls.lambda1[2]))
    assert float(row[2]) == gl


def test_obstacle_and_ledger_csv_schema(tmp_path):
    path, g = tight_path()
    xi = path.X * 0.5
    f1 = tmp_path / "xi.csv"
    save_obstacle_csv(xi, g, str(f1))
    lines = f1.read_text().splitlines()
    assert lines[0] == "step,t,cell,x,xi"
    assert len(lines) == 1 + (g.nt + 1) * g.n_cells
    f2 = tmp_path / "ledger.csv"
    save_ledger_csv(path.ledger, g, str(f2))
    lines2 = f2.read_text().splitlines()
    assert lines2[0] == "step,t,cell,x,upsilon_mass,gamma_mass"
    with pytest.raises(ConfigurationError):
        save_obstacle_csv(xi[:-1], g, str(tmp_path / "bad.csv"))
    with pytest.raises(ConfigurationError):
        save_ledger_csv(path.ledger, small_grid(nx=4, nt=3),
                        str(tmp_path / "bad2.csv"))


# ---------------------------------------------------------- reproducibility

def test_rerun_writes_identical_bytes(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    path1, _ = tight_path(seed=5)
    path2, _ = tight_path(seed=5)
    save_trajectory_csv(path1, str(a))
    save_trajectory_csv(path2, str(b))
    assert a.read_bytes() == b.read_bytes()


def test_gzip_output_is_reproducible(tmp_path):
    a = tmp_path / "a.csv.gz"
    b = tmp_path / "b.csv.gz"
    plain = tmp_path / "plain.csv"
    path, _ = tight_path(seed=6)
    save_trajectory_csv(path, str(a))
    save_trajectory_csv(path, str(b))
    save_trajectory_csv(path, str(plain))
    assert a.read_bytes() == b.read_bytes()  # mtime pinned to 0
    assert gzip.decompress(a.read_bytes()) == plain.read_bytes()
    # explicit flag works without the .gz suffix
    c = tmp_path / "c.csv"
    save_trajectory_csv(path, str(c), gzip_output=True)
    assert gzip.decompress(c.read_bytes()) == plain.read_bytes()


def test_summary_json(tmp_path):
    f = tmp_path / "summary.json"
    cfg = {"nx": 8, "theta": np.float64(2.0)}
    write_summary_json(cfg, {"p_hat": 0.25}, str(f))
    doc = json.loads(f.read_text())
    assert doc["config"] == {"nx": 8, "theta": 2.0}
    assert doc["results"] == {"p_hat": 0.25}
    assert doc["config_hash"] == config_hash(cfg)
    # keys come out sorted, so the bytes are stable
    f2 = tmp_path / "summary2.json"
    write_summary_json({"theta": 2.0, "nx": 8}, {"p_hat": 0.25}, str(f2))
    assert f.read_bytes() == f2.read_bytes()
