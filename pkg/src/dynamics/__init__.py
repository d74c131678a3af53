"""
Ego-vehicle plant: saturation, powertrain delay, integration and energy.
"""

from .plant import (
    DelayBuffer,
    VehicleParams,
    VehicleState,
    kinematic_step,
    realized_commands,
    resistance,
    saturate,
    step,
)
from .energy import EnergyLedger, accumulate_energy, integrate_energy, tractive_power

__all__ = [
    "DelayBuffer",
    "VehicleParams",
    "VehicleState",
    "kinematic_step",
    "realized_commands",
    "resistance",
    "saturate",
    "step",
    "EnergyLedger",
    "accumulate_energy",
    "integrate_energy",
    "tractive_power",
]
