"""
Motion predictors for the vehicle ahead and hidden-vehicle estimation.
"""

from .constant_speed import Prediction, predict_constant_speed
from .idm_rollout import predict_idm_rollout, rollout_behind, uniform_flow_init
from .estimator import (
    EstimatorParams,
    EstimatorState,
    HiddenVehicleEstimator,
    backtest_cost,
    estimate_hidden,
    hypothesis_range,
    initial_estimate,
    packing_bound,
)

__all__ = [
    "Prediction",
    "predict_constant_speed",
    "predict_idm_rollout",
    "rollout_behind",
    "uniform_flow_init",
    "EstimatorParams",
    "EstimatorState",
    "HiddenVehicleEstimator",
    "backtest_cost",
    "estimate_hidden",
    "hypothesis_range",
    "initial_estimate",
    "packing_bound",
]
