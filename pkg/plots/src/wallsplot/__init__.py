"""Offline figures from wallspde CSV artifacts."""

from .csvio import (GapSeries, HittingCurve, SchemaError, TrajectoryGrid,
                    read_gaps, read_hitting, read_trajectory)
from .figures import plot_gap_series, plot_heatmap, plot_hitting_curve

__all__ = [
    "GapSeries", "HittingCurve", "SchemaError", "TrajectoryGrid",
    "read_gaps", "read_hitting", "read_trajectory",
    "plot_gap_series", "plot_heatmap", "plot_hitting_curve",
]
