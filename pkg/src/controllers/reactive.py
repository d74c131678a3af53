"""
Explicit feedback controllers: reactive adaptive cruise control (RACC) and
reactive connected cruise control (RCCC) with per-link response delays.
"""

from collections import deque
from typing import Deque, Dict, Tuple
import logging

from ..carfollow import OvmParams, range_policy_V, speed_policy_W
from ..errors import ConfigurationError, DomainError
from .base import Controller, Observation, StepRecord

logger = logging.getLogger(__name__)


class SignalHistory:
    """
    Uniformly sampled speed history of every observed vehicle.

    Lookups older than the recorded span return the oldest sample, which is
    the same as assuming the speed was constant before the first record.
    """

    def __init__(self, dt: float, span: float = 0.0):
        if dt <= 0:
            raise DomainError(f"time step must be positive, got {dt}")
        self.dt = dt
        self.maxlen = int(round(span / dt)) + 1
        self.t_now = None
        self.speeds: Dict[int, Deque[float]] = {}
        self.positions: Dict[int, float] = {}

    def record(self, t: float, visible: Dict[int, Tuple[float, float]]) -> None:
        self.t_now = t
        for index, (s, v) in visible.items():
            if index not in self.speeds:
                self.speeds[index] = deque(maxlen=self.maxlen)
            self.speeds[index].append(v)
            self.positions[index] = s

    def __contains__(self, index: int) -> bool:
        return index in self.speeds

    def speed_at(self, index: int, t_query: float) -> float:
        """Speed of vehicle ``index`` at time ``t_query``, rounded to the grid."""
        if index not in self.speeds:
            raise ConfigurationError(f"no signal recorded for vehicle {index}")
        series = self.speeds[index]
        steps_back = int(round((self.t_now - t_query) / self.dt))
        steps_back = min(max(steps_back, 0), len(series) - 1)
        return series[-1 - steps_back]


def racc_accel(h: float, v: float, v1: float, p: OvmParams) -> float:
    """OVM law reacting to the vehicle immediately ahead."""
    if v < 0:
        raise DomainError(f"speed must be non-negative, got {v}")
    return p.alpha * (range_policy_V(h, p.range) - v) + p.betas[1] * (
        speed_policy_W(v1, p.range) - v
    )


def rccc_accel(h: float, v: float, history: SignalHistory, p: OvmParams, t: float) -> float:
    """OVM law with delayed speed feedback from every connected vehicle."""
    if v < 0:
        raise DomainError(f"speed must be non-negative, got {v}")
    missing = [index for index in p.betas if index not in history]
    if missing:
        raise ConfigurationError(f"missing V2V signals for vehicles {sorted(missing)}")
    a_d = p.alpha * (range_policy_V(h, p.range) - v)
    for index in sorted(p.betas):
        delayed = history.speed_at(index, t - p.sigmas.get(index, 0.0))
        a_d += p.betas[index] * (speed_policy_W(delayed, p.range) - v)
    return a_d


def ego_headway(obs: Observation, length: float) -> float:
    return obs.s1 - obs.ego.s - length


class RaccController(Controller):
    """Reactive adaptive cruise control: senses vehicle 1 only."""

    name = "racc"

    def __init__(self, params: OvmParams, length: float):
        super().__init__()
        self.params = params
        self.length = length

    def command(self, obs: Observation) -> float:
        self.last_record = StepRecord()
        return racc_accel(ego_headway(obs, self.length), obs.ego.v, obs.v1, self.params)


class RcccController(Controller):
    """Reactive connected cruise control with response delays on V2V links."""

    name = "rccc"

    def __init__(self, params: OvmParams, length: float, dt: float):
        super().__init__()
        self.params = params
        self.length = length
        self.dt = dt
        self.history = self._new_history()

    def _new_history(self) -> SignalHistory:
        span = max(self.params.sigmas.values(), default=0.0)
        return SignalHistory(self.dt, span=span)

    @property
    def required_indices(self) -> Tuple[int, ...]:
        return tuple(sorted(self.params.betas))

    def reset(self) -> None:
        super().reset()
        self.history = self._new_history()

    def command(self, obs: Observation) -> float:
        self.history.record(obs.t, obs.visible)
        self.last_record = StepRecord()
        return rccc_accel(
            ego_headway(obs, self.length), obs.ego.v, self.history, self.params, obs.t
        )
