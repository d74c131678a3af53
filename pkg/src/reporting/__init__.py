"""
Reports and figures of simulation, comparison and identification runs.
"""

from .reporter import Reporter, relative_savings, result_frame
from .plots import (
    plot_energy_bars,
    plot_energy_sweep,
    plot_margin_profile,
    plot_phase,
    plot_timeseries,
)

__all__ = [
    "Reporter",
    "relative_savings",
    "result_frame",
    "plot_energy_bars",
    "plot_energy_sweep",
    "plot_margin_profile",
    "plot_phase",
    "plot_timeseries",
]
