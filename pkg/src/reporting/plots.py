"""
SVG figures of closed-loop runs and comparisons.
"""

from pathlib import Path
from typing import Mapping, Optional, Sequence, Union
import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..carfollow import RangePolicyParams, min_headway, range_policy_V  # noqa: E402
from ..simkit import RunResult  # noqa: E402

logger = logging.getLogger(__name__)

# fixed metadata and hash salt keep the SVG output byte-stable
SVG_METADATA = {"Date": None}
plt.rcParams["svg.hashsalt"] = "ccc-lab"
plt.rcParams["svg.fonttype"] = "none"


def _save(fig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    logger.debug(f"wrote {path}")
    return path


def plot_timeseries(result: RunResult, path: Union[str, Path], d_min: float = 3.0,
                    tau_min: float = 0.67) -> Path:
    """Headway, speed and acceleration of the ego over time."""
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(8, 7))
    t = result.t

    axes[0].plot(t, result.headway, label="h")
    axes[0].plot(t, min_headway(result.ego.v, d_min, tau_min), "--", label="H_min(v)")
    axes[0].set_ylabel("headway [m]")
    axes[0].legend(loc="upper right")

    axes[1].plot(t, result.v1, label="vehicle 1")
    axes[1].plot(t, result.ego.v, label="ego")
    axes[1].set_ylabel("speed [m/s]")
    axes[1].legend(loc="upper right")

    axes[2].plot(t, result.a_cmd, label="command", alpha=0.7)
    axes[2].plot(t, result.a, label="realized")
    axes[2].set_ylabel("acceleration [m/s^2]")
    axes[2].set_xlabel("time [s]")
    axes[2].legend(loc="upper right")

    title = f"{result.controller.upper()} on {result.label}"
    if result.failed:
        title += f" (collision at t={result.failure_time:.1f} s)"
    axes[0].set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_phase(result: RunResult, path: Union[str, Path], policy: Optional[RangePolicyParams] = None,
               d_min: float = 3.0, tau_min: float = 0.67) -> Path:
    """(h, v) phase portrait with the range policy and the safety line."""
    policy = policy or RangePolicyParams()
    fig, ax = plt.subplots(figsize=(6, 5))
    ax.plot(result.headway, result.ego.v, linewidth=1.0, label="trajectory")
    if len(result):
        ax.plot(result.headway[0], result.ego.v[0], "o", label="start")

    h_max = max(float(np.max(result.headway, initial=0.0)), policy.d + policy.tau * policy.v_max) * 1.05
    h_grid = np.linspace(0.0, h_max, 200)
    ax.plot(h_grid, [range_policy_V(h, policy) for h in h_grid], "--", label="V(h)")
    v_grid = np.linspace(0.0, policy.v_max, 50)
    ax.plot(min_headway(v_grid, d_min, tau_min), v_grid, ":", label="H_min(v)")

    ax.set_xlabel("headway [m]")
    ax.set_ylabel("speed [m/s]")
    ax.set_xlim(0.0, h_max)
    ax.legend(loc="lower right")
    ax.set_title(f"{result.controller.upper()} phase portrait")
    fig.tight_layout()
    return _save(fig, path)


def plot_energy_bars(energies: Mapping[str, float], path: Union[str, Path], title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    names = list(energies)
    ax.bar([n.upper() for n in names], [energies[n] for n in names])
    ax.set_ylabel("energy [J/kg]")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_energy_sweep(n_hidden: Sequence[int], series: Mapping[str, Sequence[float]],
                      path: Union[str, Path], baselines: Optional[Mapping[str, float]] = None) -> Path:
    """Energy against the number of hidden vehicles, baselines as horizontal lines."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, values in series.items():
        ax.plot(n_hidden, values, "o-", label=name.upper())
    for name, value in (baselines or {}).items():
        ax.axhline(value, linestyle="--", linewidth=1.0, label=name.upper(), color="grey")
    ax.set_xlabel("hidden vehicles n_h")
    ax.set_ylabel("energy [J/kg]")
    ax.set_xticks(list(n_hidden))
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def plot_margin_profile(margin: np.ndarray, dt: float, path: Union[str, Path]) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(np.arange(len(margin)) * dt, margin)
    ax.set_xlabel("look-ahead [s]")
    ax.set_ylabel("safety margin [m]")
    fig.tight_layout()
    return _save(fig, path)
