"""
Closed-loop simulation of the ego vehicle behind replayed traffic.
"""

from dataclasses import dataclass, field
from typing import List, Optional
import logging

import numpy as np

from ..carfollow import RangePolicyParams, idm_range_simplified
from ..controllers import Controller, Observation
from ..dynamics import (
    DelayBuffer,
    EnergyLedger,
    VehicleParams,
    VehicleState,
    accumulate_energy,
    step,
)
from ..errors import ConfigurationError, DomainError
from .scenario import Scenario, Trajectory

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    """
    Per-step series of one closed-loop run.

    Entry k holds the ego state at step k, the command issued at step k and
    the acceleration realized during step k. A run that ends in a collision is
    cut before the colliding step and marked ``failed``.
    """
    controller: str
    label: str
    dt: float
    t: np.ndarray
    ego: Trajectory
    a_cmd: np.ndarray
    a: np.ndarray
    headway: np.ndarray
    s1: np.ndarray
    v1: np.ndarray
    energy: float
    hidden_estimate: Optional[np.ndarray] = None
    qp_status: Optional[List[str]] = None
    slack: Optional[np.ndarray] = None
    predictions: Optional[np.ndarray] = field(default=None, repr=False)
    connected_index: Optional[int] = None
    true_hidden: Optional[int] = None
    failed: bool = False
    failure_time: Optional[float] = None

    def __len__(self) -> int:
        return len(self.t)

    @property
    def fallback_count(self) -> int:
        if self.qp_status is None:
            return 0
        return sum(status != "optimal" for status in self.qp_status)


def initial_ego_state(scenario: Scenario, policy: RangePolicyParams) -> VehicleState:
    """Ego at the desired headway behind vehicle 1, matching its speed."""
    s1, v1 = scenario.positions[0, 0], scenario.speeds[0, 0]
    return VehicleState(s=s1 - scenario.length - idm_range_simplified(v1, policy), v=v1)


def run(
    scenario: Scenario,
    controller: Controller,
    plant: VehicleParams,
    ego_init: Optional[VehicleState] = None,
    policy: Optional[RangePolicyParams] = None,
) -> RunResult:
    """
    Replay ``scenario`` open loop and drive the ego with ``controller``.

    At step k the controller only sees samples k of the vehicles it is
    connected to. Commands go through the powertrain delay and saturation
    before integration. A headway of zero or less ends the run as a failure.
    """
    if controller.dt is not None and abs(controller.dt - scenario.dt) > 1e-9:
        raise ConfigurationError(
            f"controller step {controller.dt} s does not match scenario step {scenario.dt} s"
        )
    missing = [i for i in controller.required_indices if not 1 <= i <= scenario.n_vehicles]
    if missing:
        raise ConfigurationError(
            f"{controller.name} needs vehicles {missing}, scenario has {scenario.n_vehicles}"
        )
    if abs(plant.length - scenario.length) > 1e-9:
        raise ConfigurationError(
            f"vehicle length {plant.length} m does not match scenario length {scenario.length} m"
        )

    policy = policy or RangePolicyParams()
    dt = scenario.dt
    n = scenario.n_samples
    state = ego_init or initial_ego_state(scenario, policy)
    if scenario.positions[0, 0] - state.s - plant.length <= 0:
        raise DomainError("ego must start behind vehicle 1 with a positive gap")

    buffer = DelayBuffer(plant.delay_steps(dt))
    controller.reset()
    ledger = EnergyLedger()
    indices = controller.required_indices

    s = np.empty(n)
    v = np.empty(n)
    a_cmd = np.empty(n)
    a = np.empty(n)
    estimates: List[Optional[int]] = []
    statuses: List[Optional[str]] = []
    slacks: List[Optional[float]] = []
    predictions: List[np.ndarray] = []
    failure_time = None
    k_end = n

    logger.info(f"Running {controller.name} on {scenario.label} scenario ({n} steps)")
    for k in range(n):
        t = scenario.t0 + k * dt
        h = scenario.positions[k, 0] - state.s - plant.length
        if h <= 0:
            failure_time = t
            k_end = k
            logger.warning(f"{controller.name}: collision with vehicle 1 at t={t:.1f} s")
            break

        visible = {i: (scenario.positions[k, i - 1], scenario.speeds[k, i - 1]) for i in indices}
        obs = Observation(k=k, t=t, ego=state, visible=visible)
        a_d = controller.command(obs)
        record = controller.last_record

        s[k], v[k], a_cmd[k] = state.s, state.v, a_d
        state, buffer = step(state, buffer, a_d, dt, plant)
        a[k] = state.a
        ledger = accumulate_energy(ledger, v[k], a[k], plant, dt)

        estimates.append(record.hidden_estimate)
        statuses.append(record.qp_status)
        slacks.append(record.slack)
        if record.prediction is not None:
            predictions.append(record.prediction)
        if record.fallback:
            logger.debug(f"solver fallback at step {k}")

    t_series = scenario.t0 + dt * np.arange(k_end)
    s1 = scenario.positions[:k_end, 0]
    predictive = any(status is not None for status in statuses)
    connected = max(indices) if max(indices) > 1 else None
    result = RunResult(
        controller=controller.name,
        label=scenario.label,
        dt=dt,
        t=t_series,
        ego=Trajectory(dt, s[:k_end], v[:k_end]),
        a_cmd=a_cmd[:k_end],
        a=a[:k_end],
        headway=s1 - s[:k_end] - plant.length,
        s1=s1.copy(),
        v1=scenario.speeds[:k_end, 0].copy(),
        energy=ledger.w,
        hidden_estimate=(
            np.array([-1 if e is None else e for e in estimates], dtype=int)
            if any(e is not None for e in estimates) else None
        ),
        qp_status=[str(st) for st in statuses] if predictive else None,
        slack=(
            np.array([np.nan if x is None else x for x in slacks], dtype=float)
            if predictive else None
        ),
        predictions=np.vstack(predictions) if predictions else None,
        connected_index=connected,
        true_hidden=(
            connected - 2 if connected and scenario.true_hidden is not None else scenario.true_hidden
        ),
        failed=failure_time is not None,
        failure_time=failure_time,
    )
    logger.info(
        f"{controller.name} on {scenario.label}: w={result.energy:.3f} J/kg, "
        f"min headway {np.min(result.headway, initial=np.inf):.2f} m"
        + (f", FAILED at t={failure_time:.1f} s" if result.failed else "")
    )
    return result
