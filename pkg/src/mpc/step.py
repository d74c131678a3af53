"""
One receding-horizon step: build, solve, extract the next command.
"""

from dataclasses import dataclass
from typing import Optional, Sequence
import logging

import numpy as np

from ..dynamics import VehicleState
from ..predict import Prediction
from .params import MpcConfig
from .qp import QpProblem, build_qp
from .solver import QpSolution, solve_qp

logger = logging.getLogger(__name__)


@dataclass
class MpcOutcome:
    command: float
    status: str
    slack: Optional[float]
    fallback: bool
    solution: Optional[QpSolution] = None
    problem: Optional[QpProblem] = None


def extract_command(qp: QpProblem, solution: QpSolution, cfg: MpcConfig) -> float:
    """a(q) clipped to the acceleration limits at the planned speed v(q)."""
    q = cfg.q
    a_q = float(solution.x[q])
    v_q = float(qp.layout.speeds(solution.x)[q])
    upper = cfg.vehicle.u_max(max(v_q, 0.0))
    return float(np.clip(a_q, cfg.vehicle.u_min, upper))


def solve_mpc(
    x0: VehicleState,
    committed: Sequence[float],
    pred: Prediction,
    cfg: MpcConfig,
    previous_command: Optional[float] = None,
    warm_start: Optional[np.ndarray] = None,
) -> MpcOutcome:
    """
    Solve the horizon problem and return the first free command.

    If the solver does not return an optimum that passes the KKT audit the
    previous command is reused and the outcome is marked as a fallback.
    """
    qp = build_qp(x0, committed, pred, cfg)
    solution = solve_qp(qp, warm_start=warm_start, max_iterations=cfg.max_iterations)
    if not solution.optimal:
        if previous_command is None:
            previous_command = float(committed[-1]) if len(committed) else 0.0
        logger.warning(
            f"QP stopped with status {solution.status} after {solution.iterations} iterations, "
            f"reusing previous command {previous_command:.3f}"
        )
        return MpcOutcome(
            command=previous_command,
            status=solution.status,
            slack=None,
            fallback=True,
            solution=solution,
            problem=qp,
        )
    return MpcOutcome(
        command=extract_command(qp, solution, cfg),
        status=solution.status,
        slack=max(float(solution.x[-1]), 0.0),
        fallback=False,
        solution=solution,
        problem=qp,
    )


def mpc_step(x0: VehicleState, committed: Sequence[float], pred: Prediction, cfg: MpcConfig) -> float:
    """Desired acceleration a(q) for the current step."""
    return solve_mpc(x0, committed, pred, cfg).command
