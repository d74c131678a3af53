"""
Hidden-vehicle count estimation.

Each step, the number of unconnected vehicles between vehicle 1 and the
connected vehicle L is re-estimated by backtesting IDM rollouts for the
previous estimate and its two neighbours against the recorded motion of
vehicle 1.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Optional
import logging
import math

import numpy as np

from ..carfollow import IdmParams, RangePolicyParams, idm_range_simplified, min_headway
from ..errors import DomainError, OrderingError
from .idm_rollout import rollout_behind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EstimatorParams:
    history_cap: float = 23.0
    score_cap: float = 5.0
    mismatch_weight: float = 1.5
    warmup: float = 1.0
    d_min: float = 3.0
    tau_min: float = 0.67
    range: RangePolicyParams = field(default_factory=RangePolicyParams)

    def __post_init__(self):
        if self.score_cap <= 0 or self.history_cap < self.score_cap:
            raise DomainError(
                f"need 0 < score window <= history window, got {self.score_cap}, {self.history_cap}"
            )
        if self.mismatch_weight < 1.0:
            raise DomainError(f"mismatch weight must be >= 1, got {self.mismatch_weight}")


@dataclass
class EstimatorState:
    """Recorded series of vehicles 1 and L over the backtest window."""
    dt: float
    params: EstimatorParams = field(default_factory=EstimatorParams)
    n_hat_prev: Optional[int] = None
    s1: Deque[float] = field(init=False)
    v1: Deque[float] = field(init=False)
    s_L: Deque[float] = field(init=False)
    v_L: Deque[float] = field(init=False)

    def __post_init__(self):
        if self.dt <= 0:
            raise DomainError(f"time step must be positive, got {self.dt}")
        maxlen = int(round(self.params.history_cap / self.dt)) + 1
        self.s1 = deque(maxlen=maxlen)
        self.v1 = deque(maxlen=maxlen)
        self.s_L = deque(maxlen=maxlen)
        self.v_L = deque(maxlen=maxlen)

    def record(self, s1: float, v1: float, s_L: float, v_L: float) -> None:
        self.s1.append(s1)
        self.v1.append(v1)
        self.s_L.append(s_L)
        self.v_L.append(v_L)

    def __len__(self) -> int:
        return len(self.s1)

    @property
    def span(self) -> float:
        """Recorded history length T_h in seconds."""
        return max(len(self.s1) - 1, 0) * self.dt

    @property
    def score_samples(self) -> int:
        """Samples in the scoring window T_s, endpoints included."""
        return min(len(self.s1), int(round(self.params.score_cap / self.dt)) + 1)


def initial_estimate(gap: float, v1: float, policy: RangePolicyParams) -> int:
    """Vehicles that fit in ``gap`` at the desired headway of vehicle 1."""
    return max(math.ceil(gap / idm_range_simplified(v1, policy)) - 1, 0)


def packing_bound(gap: float, v: float, d_min: float, tau_min: float) -> int:
    """Largest hidden count that fits in ``gap`` at the minimum safe headway."""
    return math.ceil(gap / min_headway(v, d_min, tau_min)) - 1


def hypothesis_range(n_prev: int, gap: float, v_now: float, d_min: float, tau_min: float) -> List[int]:
    lo = max(n_prev - 1, 0)
    hi = min(n_prev + 1, packing_bound(gap, v_now, d_min, tau_min))
    return list(range(lo, hi + 1))


def backtest_cost(
    state: EstimatorState, n_h: int, idm: IdmParams, length: float, u_floor: float
) -> float:
    """Squared error of vehicle 1 over the scoring window; inf on collision."""
    rollout = rollout_behind(
        np.asarray(state.s_L),
        np.asarray(state.v_L),
        state.s1[0],
        state.v1[0],
        n_h,
        idm,
        state.dt,
        length,
        u_floor,
    )
    if rollout.collided:
        return math.inf
    m = state.score_samples
    recorded = np.asarray(state.s1)[-m:]
    predicted = rollout.s[-m:, -1]
    return float(np.sum((recorded - predicted) ** 2))


def estimate_hidden(
    state: EstimatorState,
    v_now: float,
    idm: IdmParams,
    length: float = 5.0,
    u_floor: float = -6.0,
) -> int:
    """
    Update and return the hidden-vehicle estimate.

    Before ``warmup`` seconds of history exist the spacing-based initial
    estimate is returned. Afterwards the candidates are n_prev - 1 .. n_prev + 1
    capped by the packing bound at the ego speed ``v_now``; the previous
    estimate is scored with weight 1 and the others with ``mismatch_weight``.
    Ties go to the smaller count. If every candidate collides, or the range is
    empty, the previous estimate is kept.
    """
    if len(state) == 0:
        raise DomainError("estimator has no recorded history")
    p = state.params
    gap = state.s_L[-1] - state.s1[-1]
    if gap <= 0:
        raise OrderingError(
            f"connected vehicle at {state.s_L[-1]} m is not ahead of vehicle 1 at {state.s1[-1]} m"
        )

    if state.n_hat_prev is None or state.span < p.warmup:
        state.n_hat_prev = initial_estimate(gap, state.v1[-1], p.range)
        return state.n_hat_prev

    candidates = hypothesis_range(state.n_hat_prev, gap, v_now, p.d_min, p.tau_min)
    if not candidates:
        logger.debug(f"empty hypothesis range, keeping n_hat={state.n_hat_prev}")
        return state.n_hat_prev

    costs: Dict[int, float] = {}
    for n_h in candidates:
        weight = 1.0 if n_h == state.n_hat_prev else p.mismatch_weight
        costs[n_h] = weight * backtest_cost(state, n_h, idm, length, u_floor)

    best = state.n_hat_prev
    best_cost = math.inf
    for n_h in candidates:
        if costs[n_h] < best_cost:
            best, best_cost = n_h, costs[n_h]
    if best_cost == math.inf:
        logger.debug(f"all hypotheses collided, keeping n_hat={state.n_hat_prev}")
        return state.n_hat_prev

    if best != state.n_hat_prev:
        logger.debug(f"hidden estimate {state.n_hat_prev} -> {best} (costs {costs})")
    state.n_hat_prev = best
    return best


class HiddenVehicleEstimator:
    """Stateful wrapper used by the PCCC controller."""

    def __init__(self, dt: float, idm: IdmParams, params: Optional[EstimatorParams] = None,
                 length: float = 5.0, u_floor: float = -6.0):
        self.dt = dt
        self.idm = idm
        self.params = params or EstimatorParams()
        self.length = length
        self.u_floor = u_floor
        self.state = EstimatorState(dt=dt, params=self.params)

    def reset(self) -> None:
        self.state = EstimatorState(dt=self.dt, params=self.params)

    def update(self, s1: float, v1: float, s_L: float, v_L: float, v_now: float) -> int:
        self.state.record(s1, v1, s_L, v_L)
        return estimate_hidden(self.state, v_now, self.idm, self.length, self.u_floor)

    @property
    def estimate(self) -> Optional[int]:
        return self.state.n_hat_prev
