"""
Scenarios, the closed-loop engine, metrics and batch execution.
"""

from .scenario import Scenario, Trajectory, load_scenario, save_scenario, sidecar_path
from .synthetic import KINDS, generate_synthetic
from .engine import RunResult, initial_ego_state, run
from .metrics import MetricsCalculator, RunSummary, metrics, prediction_error_surface
from .batch import RunJob, run_batch

__all__ = [
    "Scenario",
    "Trajectory",
    "load_scenario",
    "save_scenario",
    "sidecar_path",
    "KINDS",
    "generate_synthetic",
    "RunResult",
    "initial_ego_state",
    "run",
    "MetricsCalculator",
    "RunSummary",
    "metrics",
    "prediction_error_surface",
    "RunJob",
    "run_batch",
]
