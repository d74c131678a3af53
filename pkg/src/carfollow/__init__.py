"""
Car-following laws and policies.
"""

from .policies import (
    RangePolicyParams,
    idm_range_simplified,
    min_headway,
    range_policy_V,
    speed_policy_W,
)
from .idm import (
    IDM_BOUNDS,
    IDM_FIELDS,
    IdmParams,
    OvmParams,
    idm_accel,
    idm_desired_gap,
    idm_equilibrium_headway,
)
from .chain import ChainRollout, IdmParamArrays, idm_step, simulate_chain

__all__ = [
    "RangePolicyParams",
    "idm_range_simplified",
    "min_headway",
    "range_policy_V",
    "speed_policy_W",
    "IDM_BOUNDS",
    "IDM_FIELDS",
    "IdmParams",
    "OvmParams",
    "idm_accel",
    "idm_desired_gap",
    "idm_equilibrium_headway",
    "ChainRollout",
    "IdmParamArrays",
    "idm_step",
    "simulate_chain",
]
