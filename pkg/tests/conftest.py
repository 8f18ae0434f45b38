import numpy as np

from wallspde import (CoefficientSpec, SingularDriftSpec, make_grid,
                      make_walls)


def small_grid(domain="interval_dirichlet", nx=16, T=0.05, nt=50):
    return make_grid(domain, nx, T, nt)


def const_walls(grid, lo=-1.0, hi=1.0):
    return make_walls("constant", grid, lambda1=lo, lambda2=hi)


def coeff_zero():
    return CoefficientSpec.from_names("zero", "zero", None, None)


def coeff_noise(chi=1.0):
    return CoefficientSpec.from_names("zero", "constant", None, {"value": chi})


def drift_off():
    return SingularDriftSpec(c1=0.0, c2=0.0, theta=0.0)


def smooth_driver(grid, seed, scale=0.3):
    """Random driver field, smoothed in space and time, zero first row."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((grid.nt + 1, grid.n_cells))
    for _ in range(3):
        raw[:, 1:-1] = (raw[:, :-2] + raw[:, 1:-1] + raw[:, 2:]) / 3.0
        raw[1:-1] = (raw[:-2] + raw[1:-1] + raw[2:]) / 3.0
    raw[0] = 0.0
    return scale * raw
