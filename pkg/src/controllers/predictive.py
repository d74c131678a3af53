"""
Predictive controllers: PACC plans against a constant-speed prediction of
vehicle 1, PCCC against an IDM rollout behind the connected vehicle L with an
estimated number of hidden vehicles in between.
"""

from abc import abstractmethod
from collections import deque
from typing import Deque, Optional, Tuple
import logging

import numpy as np

from ..carfollow import IdmParams
from ..dynamics import realized_commands
from ..errors import ConfigurationError
from ..mpc import MpcConfig, solve_mpc
from ..predict import (
    EstimatorParams,
    HiddenVehicleEstimator,
    Prediction,
    predict_constant_speed,
    predict_idm_rollout,
)
from .base import Controller, Observation, StepRecord

logger = logging.getLogger(__name__)


class PredictiveController(Controller):
    """
    Receding-horizon controller shared by PACC and PCCC.

    Keeps its own copy of the commands still in the powertrain so the QP can
    pin them; they are passed as the accelerations the plant will realize.
    """

    def __init__(self, cfg: MpcConfig):
        super().__init__()
        self.cfg = cfg
        self.q = cfg.q
        self.dt = cfg.dt
        self.issued: Deque[float] = deque([0.0] * self.q, maxlen=self.q or None)
        self.previous_x: Optional[np.ndarray] = None
        self.previous_command = 0.0

    def reset(self) -> None:
        super().reset()
        self.issued = deque([0.0] * self.q, maxlen=self.q or None)
        self.previous_x = None
        self.previous_command = 0.0

    @abstractmethod
    def predict(self, obs: Observation) -> Tuple[Prediction, Optional[int]]:
        """Prediction of vehicle 1 and the hidden-vehicle estimate, if any."""

    def _warm_start(self) -> Optional[np.ndarray]:
        if self.previous_x is None:
            return None
        x = self.previous_x
        m = len(x) - 1
        shifted = np.empty_like(x)
        shifted[:m - 1] = x[1:m]
        shifted[m - 1] = x[m - 1]
        shifted[m] = x[m]
        return shifted

    def command(self, obs: Observation) -> float:
        pred, n_hat = self.predict(obs)
        committed = realized_commands(obs.ego, tuple(self.issued), self.cfg.dt, self.cfg.vehicle)
        outcome = solve_mpc(
            obs.ego,
            committed,
            pred,
            self.cfg,
            previous_command=self.previous_command,
            warm_start=self._warm_start(),
        )
        if outcome.fallback:
            self.previous_x = None
        else:
            self.previous_x = outcome.solution.x
        a_d = outcome.command
        if self.q:
            self.issued.append(a_d)
        self.previous_command = a_d
        self.last_record = StepRecord(
            hidden_estimate=n_hat,
            qp_status=outcome.status,
            slack=outcome.slack,
            fallback=outcome.fallback,
            prediction=pred.s_hat,
        )
        return a_d


class PaccController(PredictiveController):
    """Predictive adaptive cruise control."""

    name = "pacc"

    def predict(self, obs: Observation) -> Tuple[Prediction, Optional[int]]:
        return predict_constant_speed(obs.s1, obs.v1, self.cfg.T, self.cfg.dt), None


class PcccController(PredictiveController):
    """Predictive connected cruise control using V2V data from vehicle L."""

    name = "pccc"

    def __init__(
        self,
        cfg: MpcConfig,
        idm: IdmParams,
        connected_index: int,
        estimator: Optional[EstimatorParams] = None,
    ):
        super().__init__(cfg)
        if connected_index < 2:
            raise ConfigurationError(
                f"connected vehicle index must be at least 2, got {connected_index}"
            )
        self.idm = idm
        self.connected_index = connected_index
        self.estimator = HiddenVehicleEstimator(
            cfg.dt,
            idm,
            estimator or EstimatorParams(range=cfg.range),
            length=cfg.vehicle.length,
            u_floor=cfg.vehicle.u_min,
        )

    @property
    def required_indices(self) -> Tuple[int, ...]:
        return (1, self.connected_index)

    def reset(self) -> None:
        super().reset()
        self.estimator.reset()

    def predict(self, obs: Observation) -> Tuple[Prediction, Optional[int]]:
        if self.connected_index not in obs.visible:
            raise ConfigurationError(f"missing V2V signal for vehicle {self.connected_index}")
        s_L, v_L = obs.visible[self.connected_index]
        n_hat = self.estimator.update(obs.s1, obs.v1, s_L, v_L, obs.ego.v)
        pred = predict_idm_rollout(
            obs.s1,
            obs.v1,
            s_L,
            v_L,
            n_hat,
            self.idm,
            self.cfg.T,
            self.cfg.dt,
            length=self.cfg.vehicle.length,
            u_floor=self.cfg.vehicle.u_min,
        )
        return pred, n_hat
