"""
Range and speed policies shared by the reactive and predictive controllers.
"""

from dataclasses import dataclass
from typing import Protocol

from ..errors import DomainError


@dataclass(frozen=True)
class RangePolicyParams:
    """Time headway tau [s], stopping distance d [m] and free speed v_max [m/s]."""
    tau: float = 1.67
    d: float = 5.0
    v_max: float = 35.0

    def __post_init__(self):
        if self.tau <= 0 or self.d <= 0 or self.v_max <= 0:
            raise DomainError(
                f"range policy needs tau, d, v_max > 0, got {self.tau}, {self.d}, {self.v_max}"
            )


class HeadwayPolicy(Protocol):
    tau: float
    d: float


def range_policy_V(h: float, p: RangePolicyParams) -> float:
    """Desired velocity for headway h."""
    return min(p.v_max, max(0.0, (h - p.d) / p.tau))


def speed_policy_W(v1: float, p: RangePolicyParams) -> float:
    """Reference speed that keeps the ego from following a speeding leader."""
    return min(p.v_max, v1)


def idm_range_simplified(v: float, p: HeadwayPolicy) -> float:
    """Steady-state desired headway H(v) = d + tau * v."""
    if v < 0:
        raise DomainError(f"speed must be non-negative, got {v}")
    return p.d + p.tau * v


def min_headway(v: float, d_min: float, tau_min: float) -> float:
    """Safety floor H_min(v) = d_min + tau_min * v."""
    return d_min + tau_min * v
