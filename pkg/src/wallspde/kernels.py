"""Heat kernels on the circle and the Dirichlet interval, and quadratures
built on them.

The free-line kernel is

    g(t, x) = (4*pi*t)**(-1/2) * exp(-x**2 / (4*t)),

the circle kernel wraps it over integer shifts of the geodesic distance,

    G(t, x, y) = sum_m g(t, rho(x, y) + m),

and the interval kernel with pinned zero boundary uses image charges,

    G_D(t, x, y) = sum_m [ g(t, x - y + 2m) - g(t, x + y + 2m) ].

Image sums are truncated once the omitted Gaussian tails fall below the
configured tolerance; the truncation radius grows like sqrt(t * log(1/tol)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as spfft

from .errors import ConfigurationError, DomainError
from .grids import Grid, circle_distance

__all__ = [
    "KernelConfig",
    "gauss_kernel",
    "circle_green",
    "dirichlet_green",
    "kernel_matrix",
    "heat_convolve",
    "heat_propagate",
    "green_power_integral",
]


@dataclass(frozen=True)
class KernelConfig:
    """Truncation and quadrature knobs for kernel evaluations.

    image_tolerance bounds the relative mass of the dropped image terms and
    must sit in (0, 1e-6]; quadrature_n is the node count used by standalone
    quadratures (at least 16).
    """

    image_tolerance: float = 1e-12
    quadrature_n: int = 256

    def __post_init__(self):
        if not (0.0 < self.image_tolerance <= 1e-6):
            raise ConfigurationError(
                f"image_tolerance must lie in (0, 1e-6], got {self.image_tolerance}")
        if self.quadrature_n < 16:
            raise ConfigurationError(
                f"quadrature_n must be at least 16, got {self.quadrature_n}")

    def image_count(self, t: float) -> int:
        """Number of image shifts kept on each side at time scale t."""
        return math.ceil(math.sqrt(4.0 * t * math.log(1.0 / self.image_tolerance))) + 2


DEFAULT_KERNEL_CONFIG = KernelConfig()


def gauss_kernel(t: float, x) -> np.ndarray:
    """Free-line heat kernel (4*pi*t)**(-1/2) * exp(-x**2/(4*t)) for t > 0."""
    if not t > 0:
        raise DomainError(f"gauss_kernel needs t > 0, got t={t}")
    x = np.asarray(x, dtype=float)
    out = np.exp(-(x * x) / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)
    return out if out.ndim else float(out)


def circle_green(t: float, x, y, cfg: KernelConfig = DEFAULT_KERNEL_CONFIG):
    """Periodic heat kernel on the unit circle, truncated per cfg."""
    if not t > 0:
        raise DomainError(f"circle_green needs t > 0, got t={t}")
    rho = np.asarray(circle_distance(x, y), dtype=float)
    m_max = cfg.image_count(t)
    out = np.zeros_like(rho)
    for m in range(-m_max, m_max + 1):
        out += gauss_kernel(t, rho + m)
    return out if out.ndim else float(out)


def dirichlet_green(t: float, x, y, cfg: KernelConfig = DEFAULT_KERNEL_CONFIG):
    """Heat kernel on [0, 1] with zero boundary, by the method of images."""
    if not t > 0:
        raise DomainError(f"dirichlet_green needs t > 0, got t={t}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(x > 1) or np.any(y < 0) or np.any(y > 1):
        raise DomainError("dirichlet_green arguments must lie in [0, 1]")
    m_max = cfg.image_count(t)
    out = np.zeros(np.broadcast(x, y).shape, dtype=float)
    for m in range(-m_max, m_max + 1):
        out += gauss_kernel(t, x - y + 2.0 * m) - gauss_kernel(t, x + y + 2.0 * m)
    return out if out.ndim else float(out)


def kernel_matrix(grid: Grid, t: float,
                  cfg: KernelConfig = DEFAULT_KERNEL_CONFIG) -> np.ndarray:
    """Quadrature matrix K with K[i, j] = G(t, x_i, y_j) * dx, so that K @ f
    approximates the heat semigroup applied to samples of f on the grid.

    On the interval the implied zero endpoint values make dx * sum the exact
    trapezoid rule; on the circle it is the periodic trapezoid rule.
    """
    x = grid.x_coords
    if grid.is_circle():
        g = circle_green(t, x[:, None], x[None, :], cfg)
    else:
        g = dirichlet_green(t, x[:, None], x[None, :], cfg)
    return g * grid.dx


def heat_convolve(field: np.ndarray, t: float, grid: Grid,
                  cfg: KernelConfig = DEFAULT_KERNEL_CONFIG) -> np.ndarray:
    """Propagate grid samples of a field through the heat semigroup for time t."""
    field = np.asarray(field, dtype=float)
    if field.shape != (grid.n_cells,):
        raise ConfigurationError(
            f"field shape {field.shape} does not match grid ({grid.n_cells},)")
    return kernel_matrix(grid, t, cfg) @ field


def heat_propagate(field: np.ndarray, t: float, grid: Grid) -> np.ndarray:
    """Apply the heat semigroup to grid samples through the spectral form of
    the Green's function: each resolved mode decays by its exact continuum
    factor (exp(-4*pi^2*k^2*t) on the circle, exp(-k^2*pi^2*t) on the
    interval).

    This is the route to use when t is a single time step applied many times.
    The sampled-kernel quadrature (kernel_matrix) folds every above-Nyquist
    image of a low mode back onto that mode with positive weight, so one
    application inflates it by about 2*exp(-4*pi^2*N^2*t) (N the node count);
    harmless for one moderate t, divergent when compounded over nt steps with
    N^2*t of order one.  The spectral form has no fold-back terms and
    composes exactly: applying s then t equals applying s+t.

    Accepts arrays of shape (..., n_cells); the transform runs on the last
    axis.
    """
    if not t > 0:
        raise DomainError(f"heat_propagate needs t > 0, got t={t}")
    field = np.asarray(field, dtype=float)
    if field.shape[-1] != grid.n_cells:
        raise ConfigurationError(
            f"field last axis {field.shape[-1]} does not match grid ({grid.n_cells})")
    if grid.is_circle():
        k = np.fft.rfftfreq(grid.nx, d=grid.dx)
        mult = np.exp(-((2.0 * np.pi * k) ** 2) * t)
        return np.fft.irfft(np.fft.rfft(field, axis=-1) * mult, n=grid.nx, axis=-1)
    k = np.arange(1, grid.nx + 1, dtype=float)
    mult = np.exp(-((np.pi * k) ** 2) * t)
    coeffs = spfft.dst(field, type=1, norm="ortho", axis=-1)
    return spfft.idst(coeffs * mult, type=1, norm="ortho", axis=-1)


def _circle_power_inner(a: float, u: float, n: int, cfg: KernelConfig) -> float:
    """integral over the circle of G(u, y, 0)**a dy at one time lag u."""
    # Sharply peaked regime: wrap images are below tolerance, so the circle
    # integral equals the line integral of g**a, which is closed-form.
    width = math.sqrt(4.0 * u * math.log(1.0 / cfg.image_tolerance))
    if width < 0.5:
        return (4.0 * math.pi * u) ** (0.5 * (1.0 - a)) / math.sqrt(a)
    y = np.arange(n) / n
    vals = circle_green(u, y, 0.0, cfg) ** a
    return float(np.sum(vals) / n)


def green_power_integral(a: float, t: float, grid: Grid,
                         cfg: KernelConfig = DEFAULT_KERNEL_CONFIG) -> float:
    """Quadrature estimate of the space-time kernel power integral

        F(t) = integral_0^t integral_circle G(t-s, x, y)**a dy ds,

    independent of x by shift invariance (evaluated at x = 0).  Valid for
    a in (1, 3), where the time singularity at s = t is integrable.

    The integrand in the lag variable u = t - s behaves like u**((1-a)/2),
    so the time axis is refined geometrically toward u = 0: Simpson blocks
    down to the sharply-peaked regime, then the closed-form line-kernel
    antiderivative for the remaining head.
    """
    if not (1.0 < a < 3.0):
        raise DomainError(f"green_power_integral needs a in (1, 3), got a={a}")
    if not (0.0 < t <= 1.0):
        raise DomainError(f"green_power_integral needs t in (0, 1], got t={t}")
    n = max(cfg.quadrature_n, grid.nx)

    # Head: largest u with the line-kernel regime still valid.
    log_tol = math.log(1.0 / cfg.image_tolerance)
    u_cut = min(t, (0.5 ** 2) / (4.0 * log_tol))
    c_line = (4.0 * math.pi) ** (0.5 * (1.0 - a)) / math.sqrt(a)
    total = c_line * u_cut ** (0.5 * (3.0 - a)) * 2.0 / (3.0 - a)
    if u_cut >= t:
        return total

    # Tail: geometric Simpson blocks from u_cut up to t.
    edges = [u_cut]
    while edges[-1] < t:
        edges.append(min(t, edges[-1] * 2.0))
    for lo, hi in zip(edges[:-1], edges[1:]):
        nodes = np.linspace(lo, hi, 9)
        vals = np.array([_circle_power_inner(a, float(u), n, cfg) for u in nodes])
        h = (hi - lo) / 8.0
        total += float(h / 3.0 * (vals[0] + vals[-1]
                                  + 4.0 * vals[1:-1:2].sum() + 2.0 * vals[2:-2:2].sum()))
    return total
