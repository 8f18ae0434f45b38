"""Space-time grids and reproducible noise streams.

Two domain kinds are supported on the unit interval of length 1: a circle
(periodic, nodes 0, dx, ..., 1-dx with dx = 1/nx) and an interval with pinned
zero boundary (interior nodes dx, ..., nx*dx with dx = 1/(nx+1); the endpoint
values are implied zeros and never stored).

Noise streams are counter-based: every (master_seed, path_index) pair keys an
independent Philox generator, so parallel paths can be drawn in any order, in
any batch size, and still reproduce bit-identical sequences.  A stream is
stateful; sampling advances it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "Grid",
    "NoiseStream",
    "make_grid",
    "circle_distance",
    "derive_stream",
    "sample_noise_field",
]

CIRCLE = "circle"
INTERVAL = "interval_dirichlet"
_DOMAIN_KINDS = (CIRCLE, INTERVAL)


@dataclass(frozen=True, eq=False)
class Grid:
    """Immutable space-time lattice. Freely shared between solvers."""

    domain_kind: str
    nx: int
    dx: float
    T: float
    nt: int
    dt: float
    x_coords: np.ndarray

    @property
    def n_cells(self) -> int:
        return self.x_coords.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.nt + 1)

    def is_circle(self) -> bool:
        return self.domain_kind == CIRCLE


def make_grid(domain_kind: str, nx: int, T: float, nt: int) -> Grid:
    """Build a grid.

    nx counts spatial cells: circle nodes {0, dx, ..., 1-dx} with dx = 1/nx,
    or interval interior nodes {dx, ..., nx*dx} with dx = 1/(nx+1).  Time runs
    over nt uniform steps of dt = T/nt.
    """
    if domain_kind not in _DOMAIN_KINDS:
        raise ConfigurationError(
            f"unknown domain kind {domain_kind!r}; expected one of {_DOMAIN_KINDS}")
    if nx <= 0 or nt <= 0:
        raise ConfigurationError(f"nx and nt must be positive, got nx={nx}, nt={nt}")
    if not T > 0:
        raise ConfigurationError(f"T must be positive, got T={T}")
    if domain_kind == CIRCLE:
        dx = 1.0 / nx
        x = dx * np.arange(nx)
    else:
        dx = 1.0 / (nx + 1)
        x = dx * np.arange(1, nx + 1)
    x.setflags(write=False)
    return Grid(domain_kind, int(nx), dx, float(T), int(nt), float(T) / nt, x)


def circle_distance(x, y):
    """Geodesic distance on the unit circle: min over k in {-1,0,1} of |x-y+k|.

    Accepts scalars or arrays in [0, 1); the result lies in [0, 0.5].
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(x >= 1) or np.any(y < 0) or np.any(y >= 1):
        raise DomainError("circle_distance arguments must lie in [0, 1)")
    d = x - y
    dist = np.minimum(np.abs(d), np.minimum(np.abs(d + 1.0), np.abs(d - 1.0)))
    return dist if dist.ndim else float(dist)


@dataclass(eq=False)
class NoiseStream:
    """One path's noise source.  Keyed, not seeded-by-sequence: equal
    (master_seed, path_index) pairs reproduce the exact draw sequence and
    distinct pairs are independent by construction."""

    master_seed: int
    path_index: int
    _gen: np.random.Generator = field(repr=False)

    def standard_normal(self, size) -> np.ndarray:
        return self._gen.standard_normal(size)


def derive_stream(master_seed: int, path_index: int) -> NoiseStream:
    """Derive the noise stream for one path from the run's master seed."""
    if master_seed < 0 or path_index < 0:
        raise ConfigurationError("master_seed and path_index must be nonnegative")
    key = np.array([master_seed & 0xFFFFFFFFFFFFFFFF,
                    path_index & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    return NoiseStream(master_seed, path_index, gen)


def sample_noise_field(stream: NoiseStream, grid: Grid) -> np.ndarray:
    """Draw one time-slice of unit normals, one per spatial cell, advancing
    the stream.  Scaling by sqrt(dt/dx) happens in the integrators, not here.
    """
    return stream.standard_normal(grid.n_cells)
