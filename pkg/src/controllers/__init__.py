"""
Longitudinal controllers for the automated ego vehicle.
"""

from .base import Controller, Observation, StepRecord
from .reactive import (
    RaccController,
    RcccController,
    SignalHistory,
    racc_accel,
    rccc_accel,
)
from .predictive import PaccController, PcccController, PredictiveController

CONTROLLER_NAMES = ("racc", "rccc", "pacc", "pccc")

__all__ = [
    "Controller",
    "Observation",
    "StepRecord",
    "RaccController",
    "RcccController",
    "SignalHistory",
    "racc_accel",
    "rccc_accel",
    "PaccController",
    "PcccController",
    "PredictiveController",
    "CONTROLLER_NAMES",
]
