"""
Result tables and text reports of simulation, comparison and identification runs.
"""

from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple
import logging
import os

import numpy as np
import pandas as pd
import yaml

from ..carfollow import IDM_FIELDS, IdmParams
from ..ident import IdentResult
from ..simkit import RunResult, RunSummary

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.6f"


def result_frame(result: RunResult) -> pd.DataFrame:
    """One row per step: time, ego state, commands, headway and vehicle 1."""
    data = {
        "t": result.t,
        "s": result.ego.s,
        "v": result.ego.v,
        "a_cmd": result.a_cmd,
        "a": result.a,
        "h": result.headway,
        "s1": result.s1,
        "v1": result.v1,
    }
    if result.hidden_estimate is not None:
        data["n_hat"] = result.hidden_estimate
    if result.qp_status is not None:
        data["qp_status"] = result.qp_status
        data["slack"] = result.slack
    return pd.DataFrame(data)


def relative_savings(w_base: float, w: float) -> float:
    """Energy saved relative to ``w_base`` in percent."""
    if w_base == 0:
        return 0.0
    return 100.0 * (w_base - w) / w_base


class Reporter:
    """
    Writes run artifacts under one output directory.
    """

    def __init__(self, config: Dict[str, Any]):
        self.config = config
        self.out_dir = config.get("out_dir", "reports")
        os.makedirs(self.out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def write_result(self, result: RunResult, name: str = "result.csv") -> str:
        filepath = self.path(name)
        result_frame(result).to_csv(filepath, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.info(f"Run result written: {filepath}")
        return filepath

    def write_summary(self, summary: RunSummary, dt: float, name: str = "summary.txt",
                      extra: Optional[Mapping[str, Any]] = None) -> str:
        filepath = self.path(name)
        content = self._format_summary(summary, dt, extra or {})
        with open(filepath, "w") as f:
            f.write(content)
        logger.info(f"Summary written: {filepath}")
        return filepath

    def _format_summary(self, s: RunSummary, dt: float, extra: Mapping[str, Any]) -> str:
        lines = [
            f"controller: {s.controller}",
            f"scenario: {s.label}",
            f"steps: {s.steps}",
            f"duration [s]: {s.duration:.1f}",
            f"energy [J/kg]: {s.energy:.4f}",
            f"min headway [m]: {s.min_headway:.3f}",
            f"mean headway [m]: {s.mean_headway:.3f}",
            f"max |a| [m/s^2]: {s.max_abs_accel:.3f}",
            f"safety floor violations: {s.floor_violations}",
            f"max floor violation [m]: {s.max_floor_violation:.3f}",
            f"safety audit (threshold {s.audit_threshold:.2f} m): {'PASS' if s.audit_passed else 'FAIL'}",
        ]
        if s.failed:
            lines.append(f"FAILED: collision at t={s.failure_time:.1f} s")
        else:
            lines.append("failed: no")
        if s.max_slack is not None:
            lines.append(f"solver fallbacks: {s.fallback_count}")
            lines.append(f"max slack [m]: {s.max_slack:.4f}")
        if s.connected_index is not None:
            lines.append(f"connected vehicle: {s.connected_index}")
        if s.true_hidden is not None:
            lines.append(f"true hidden vehicles: {s.true_hidden}")
        if s.estimator_accuracy is not None:
            lines.append(f"estimator accuracy: {100.0 * s.estimator_accuracy:.1f}%")
        if s.mean_abs_prediction_error is not None:
            for seconds in (1.0, 4.0, 8.0):
                err = s.prediction_error_at(seconds, dt)
                if err is not None and not np.isnan(err):
                    lines.append(f"mean |prediction error| at {seconds:.0f} s [m]: {err:.3f}")
        for key, value in extra.items():
            lines.append(f"{key}: {value}")
        return "\n".join(lines) + "\n"

    def write_energy_table(self, summaries: Mapping[str, RunSummary],
                           name: str = "energy.csv") -> pd.DataFrame:
        rows = [
            {"controller": controller, "energy": s.energy, "failed": s.failed,
             "min_headway": s.min_headway, "audit_passed": s.audit_passed}
            for controller, s in summaries.items()
        ]
        frame = pd.DataFrame(rows, columns=["controller", "energy", "failed", "min_headway", "audit_passed"])
        filepath = self.path(name)
        frame.to_csv(filepath, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.info(f"Energy table written: {filepath}")
        return frame

    def write_savings_table(self, summaries: Mapping[str, RunSummary],
                            pairs: Sequence[Tuple[str, str]],
                            name: str = "savings.csv") -> pd.DataFrame:
        """
        Relative savings (w_base - w) / w_base in percent, rounded to 0.1.

        ``pairs`` lists (controller, baseline); pairs with a missing member are
        skipped.
        """
        rows: List[Dict[str, Any]] = []
        for controller, base in pairs:
            if controller not in summaries or base not in summaries:
                continue
            w, w_base = summaries[controller].energy, summaries[base].energy
            rows.append({
                "controller": controller,
                "baseline": base,
                "energy": w,
                "baseline_energy": w_base,
                "savings_pct": round(relative_savings(w_base, w), 1),
            })
        frame = pd.DataFrame(rows, columns=["controller", "baseline", "energy", "baseline_energy", "savings_pct"])
        filepath = self.path(name)
        frame.to_csv(filepath, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.info(f"Savings table written: {filepath}")
        return frame

    def write_sweep_table(self, rows: Sequence[Dict[str, Any]], name: str = "sweep.csv") -> pd.DataFrame:
        frame = pd.DataFrame(list(rows))
        filepath = self.path(name)
        frame.to_csv(filepath, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.info(f"Hidden-vehicle sweep written: {filepath}")
        return frame

    def write_idm_fragment(self, params: IdmParams, name: str = "idm_params.yaml") -> str:
        """Identified parameters as an ``idm:`` config override."""
        filepath = self.path(name)
        fragment = {"idm": {field: float(getattr(params, field)) for field in IDM_FIELDS}}
        with open(filepath, "w") as f:
            yaml.safe_dump(fragment, f, sort_keys=False)
        logger.info(f"IDM parameters written: {filepath}")
        return filepath

    def write_fit_report(self, fit: IdentResult, name: str = "fit_report.txt",
                         reference_cost: Optional[float] = None) -> str:
        filepath = self.path(name)
        lines = [f"cost [m]: {fit.cost:.6f}", f"evaluations: {fit.evaluations}"]
        if reference_cost is not None:
            lines.append(f"generator cost [m]: {reference_cost:.6f}")
        lines.append("parameters:")
        for field in IDM_FIELDS:
            lines.append(f"  {field}: {getattr(fit.params, field):.6f}")
        lines.append("starts:")
        for i, start in enumerate(fit.starts):
            lines.append(f"  start {i}: cost {start.cost:.6f} after {start.evaluations} evaluations")
        with open(filepath, "w") as f:
            f.write("\n".join(lines) + "\n")
        logger.info(f"Fit report written: {filepath}")
        return filepath

    def write_comparison_text(self, energy: pd.DataFrame, savings: pd.DataFrame,
                              name: str = "comparison.txt") -> str:
        filepath = self.path(name)
        lines = []
        for row in energy.itertuples(index=False):
            line = f"{row.controller.upper():6s} w = {row.energy:10.4f} J/kg"
            if row.failed:
                line += "  (collision)"
            lines.append(line)
        if len(savings):
            lines.append("")
        for row in savings.itertuples(index=False):
            lines.append(f"{row.controller.upper()} saves {row.savings_pct:.1f}% vs {row.baseline.upper()}")
        with open(filepath, "w") as f:
            f.write("\n".join(lines) + "\n")
        logger.info(f"Comparison written: {filepath}")
        return filepath
