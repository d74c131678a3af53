"""
Chance-constrained receding-horizon control for the predictive controllers.
"""

from .params import MpcConfig
from .margin import (
    chance_level,
    noise_gain,
    position_variance_factors,
    safety_margin,
    safety_margin_profile,
)
from .qp import MpcLayout, QpProblem, build_qp, condensed_dynamics, dump_qp, load_qp
from .solver import (
    KKT_FAILED,
    MAX_ITERATIONS,
    OPTIMAL,
    KktReport,
    QpSolution,
    equality_duals,
    kkt_residuals,
    solve_qp,
)
from .step import MpcOutcome, extract_command, mpc_step, solve_mpc

__all__ = [
    "MpcConfig",
    "chance_level",
    "noise_gain",
    "position_variance_factors",
    "safety_margin",
    "safety_margin_profile",
    "MpcLayout",
    "QpProblem",
    "build_qp",
    "condensed_dynamics",
    "dump_qp",
    "load_qp",
    "KKT_FAILED",
    "MAX_ITERATIONS",
    "OPTIMAL",
    "KktReport",
    "QpSolution",
    "equality_duals",
    "kkt_residuals",
    "solve_qp",
    "MpcOutcome",
    "extract_command",
    "mpc_step",
    "solve_mpc",
]
