"""
Summary metrics of closed-loop runs.
"""

from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional
import logging

import numpy as np

from ..carfollow import min_headway
from .engine import RunResult

logger = logging.getLogger(__name__)


@dataclass
class RunSummary:
    """Container for run-level metrics."""

    controller: str
    label: str
    steps: int
    duration: float

    # Energy
    energy: float

    # Headway and comfort
    min_headway: float
    mean_headway: float
    max_abs_accel: float

    # Safety floor audit
    floor_violations: int
    max_floor_violation: float
    audit_threshold: float
    audit_passed: bool

    # Failure and solver health
    failed: bool
    failure_time: Optional[float]
    fallback_count: int
    max_slack: Optional[float]

    # Prediction and estimation
    mean_abs_prediction_error: Optional[np.ndarray]
    estimator_accuracy: Optional[float]
    connected_index: Optional[int]
    true_hidden: Optional[int]

    def as_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        if self.mean_abs_prediction_error is not None:
            data["mean_abs_prediction_error"] = self.mean_abs_prediction_error.tolist()
        return data

    def prediction_error_at(self, seconds: float, dt: float) -> Optional[float]:
        """Mean |error| at a look-ahead of ``seconds``."""
        if self.mean_abs_prediction_error is None:
            return None
        k = int(round(seconds / dt))
        if k >= len(self.mean_abs_prediction_error):
            return None
        return float(self.mean_abs_prediction_error[k])


def prediction_error_surface(result: RunResult) -> Optional[np.ndarray]:
    """
    error[t, k] = s_hat_1(k | t) - s_1(t + k); NaN where t + k runs past the
    end of the run.
    """
    if result.predictions is None:
        return None
    n, width = result.predictions.shape
    error = np.full((n, width), np.nan)
    for k in range(width):
        valid = n - k
        if valid <= 0:
            break
        error[:valid, k] = result.predictions[:valid, k] - result.s1[k:k + valid]
    return error


class MetricsCalculator:
    """Calculate run metrics against the safety floor d_min + tau_min * v."""

    def __init__(self, d_min: float = 3.0, tau_min: float = 0.67, audit_threshold: float = 0.5,
                 estimator_warmup: float = 0.0):
        self.d_min = d_min
        self.tau_min = tau_min
        self.audit_threshold = audit_threshold
        self.estimator_warmup = estimator_warmup

    def calculate(self, result: RunResult) -> RunSummary:
        n = len(result)
        if n == 0:
            return RunSummary(
                controller=result.controller,
                label=result.label,
                steps=0,
                duration=0.0,
                energy=0.0,
                min_headway=float("nan"),
                mean_headway=float("nan"),
                max_abs_accel=0.0,
                floor_violations=0,
                max_floor_violation=0.0,
                audit_threshold=self.audit_threshold,
                audit_passed=not result.failed,
                failed=result.failed,
                failure_time=result.failure_time,
                fallback_count=0,
                max_slack=None,
                mean_abs_prediction_error=None,
                estimator_accuracy=None,
                connected_index=result.connected_index,
                true_hidden=result.true_hidden,
            )

        deficit = min_headway(result.ego.v, self.d_min, self.tau_min) - result.headway
        violations = deficit > 0
        max_violation = float(np.max(deficit, initial=0.0)) if violations.any() else 0.0

        return RunSummary(
            controller=result.controller,
            label=result.label,
            steps=n,
            duration=n * result.dt,
            energy=result.energy,
            min_headway=float(np.min(result.headway)),
            mean_headway=float(np.mean(result.headway)),
            max_abs_accel=float(np.max(np.abs(result.a))),
            floor_violations=int(np.sum(violations)),
            max_floor_violation=max_violation,
            audit_threshold=self.audit_threshold,
            audit_passed=(not result.failed) and max_violation <= self.audit_threshold,
            failed=result.failed,
            failure_time=result.failure_time,
            fallback_count=result.fallback_count,
            max_slack=self._max_slack(result),
            mean_abs_prediction_error=self._prediction_error(result),
            estimator_accuracy=self._estimator_accuracy(result),
            connected_index=result.connected_index,
            true_hidden=result.true_hidden,
        )

    def _max_slack(self, result: RunResult) -> Optional[float]:
        if result.slack is None or np.all(np.isnan(result.slack)):
            return None
        return float(np.nanmax(result.slack))

    def _prediction_error(self, result: RunResult) -> Optional[np.ndarray]:
        surface = prediction_error_surface(result)
        if surface is None:
            return None
        with np.errstate(invalid="ignore"):
            counts = np.sum(~np.isnan(surface), axis=0)
            totals = np.nansum(np.abs(surface), axis=0)
        return np.where(counts > 0, totals / np.maximum(counts, 1), np.nan)

    def _estimator_accuracy(self, result: RunResult) -> Optional[float]:
        if result.hidden_estimate is None or result.true_hidden is None:
            return None
        start = int(round(self.estimator_warmup / result.dt))
        window = result.hidden_estimate[start:]
        if len(window) == 0:
            return None
        return float(np.mean(window == result.true_hidden))


def metrics(result: RunResult, **kwargs) -> RunSummary:
    """Summary of one run; keyword arguments configure ``MetricsCalculator``."""
    return MetricsCalculator(**kwargs).calculate(result)
