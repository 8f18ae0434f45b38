"""The three figure kinds.

Everything drawn comes straight from CSV columns; this layer computes
axes and nothing else.  Artists carry gids so tests can find them.
"""

import matplotlib

matplotlib.use("Agg")  # batch component, never interactive

import matplotlib.pyplot as plt
import numpy as np

from .csvio import GapSeries, HittingCurve, TrajectoryGrid

CRITICAL_THETA = 3.0


def plot_heatmap(grid: TrajectoryGrid):
    """Space-time field with wall-contact cells overlaid from the ledger
    columns: upward triangles where the lower wall pushed, downward where
    the upper wall pushed."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    mesh = ax.pcolormesh(grid.x, grid.t, grid.X, shading="nearest",
                         cmap="RdBu_r")
    fig.colorbar(mesh, ax=ax, label="X(x, t)")
    for mass, gid, marker, label in (
            (grid.upsilon, "contact-lower", "^", "lower-wall contact"),
            (grid.gamma, "contact-upper", "v", "upper-wall contact")):
        steps, cells = np.nonzero(mass)
        if steps.size == 0:
            continue
        sc = ax.scatter(grid.x[cells], grid.t[steps], s=12, marker=marker,
                        color="black", label=label)
        sc.set_gid(gid)
    if ax.collections[1:]:
        ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    fig.tight_layout()
    return fig


def plot_gap_series(series: GapSeries):
    """Distance to each wall over time, as the simulator recorded it."""
    fig, ax = plt.subplots(figsize=(7.0, 3.5))
    lo, = ax.plot(series.t, series.gap_lower, label="gap to lower wall")
    up, = ax.plot(series.t, series.gap_upper, label="gap to upper wall")
    lo.set_gid("gap-lower")
    up.set_gid("gap-upper")
    ax.axhline(0.0, color="black", linewidth=0.8, linestyle=":")
    ax.set_xlabel("t")
    ax.set_ylabel("min gap over cells")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig


def plot_hitting_curve(curve: HittingCurve):
    """Hit probability per drift exponent with its confidence band and a
    marker at the critical exponent."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    yerr = np.vstack([curve.p_hat - curve.ci_low,
                      curve.ci_high - curve.p_hat])
    container = ax.errorbar(curve.theta, curve.p_hat, yerr=yerr,
                            fmt="o-", capsize=3, label="estimate")
    container.lines[0].set_gid("hitting-curve")
    mark = ax.axvline(CRITICAL_THETA, color="gray", linestyle="--",
                      linewidth=1.0, label="critical exponent")
    mark.set_gid("theta-critical")
    ax.set_xlabel("theta")
    ax.set_ylabel("P(wall contact by T)")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig
