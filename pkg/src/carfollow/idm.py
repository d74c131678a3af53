"""
Intelligent driver model (IDM) and optimal velocity model (OVM) parameter sets.
"""

from dataclasses import asdict, dataclass, field
from typing import Dict, Tuple
import math

import numpy as np

from ..errors import DomainError
from .policies import RangePolicyParams

# Closed boxes used by the identification problem, in vector order.
IDM_FIELDS: Tuple[str, ...] = ("a0", "b0", "delta", "tau", "d", "v_max")
IDM_BOUNDS: Dict[str, Tuple[float, float]] = {
    "a0": (0.1, 4.0),
    "b0": (0.1, 8.5),
    "delta": (3.0, 5.0),
    "tau": (0.1, 4.0),
    "d": (5.0, 10.0),
    "v_max": (30.0, 36.0),
}


@dataclass(frozen=True)
class IdmParams:
    """IDM parameters; bound-touching values are valid."""
    a0: float = 2.2868
    b0: float = 8.5
    delta: float = 3.0
    tau: float = 0.9282
    d: float = 5.0
    v_max: float = 32.8682

    def within_bounds(self, tol: float = 0.0) -> bool:
        return all(
            lo - tol <= getattr(self, name) <= hi + tol
            for name, (lo, hi) in IDM_BOUNDS.items()
        )

    def as_vector(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in IDM_FIELDS], dtype=float)

    @classmethod
    def from_vector(cls, x) -> "IdmParams":
        return cls(**{name: float(value) for name, value in zip(IDM_FIELDS, x)})

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class OvmParams:
    """
    Gains of the optimal velocity model controller.

    ``betas`` and ``sigmas`` are keyed by vehicle index (1 is the vehicle
    immediately ahead). Missing sigma entries mean no response delay.
    """
    alpha: float = 0.4
    betas: Dict[int, float] = field(default_factory=lambda: {1: 0.6617})
    sigmas: Dict[int, float] = field(default_factory=dict)
    range: RangePolicyParams = field(default_factory=RangePolicyParams)

    def __post_init__(self):
        if self.alpha <= 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if 1 not in self.betas:
            raise DomainError("OVM gains must include beta for vehicle 1")
        if any(beta < 0 for beta in self.betas.values()):
            raise DomainError("OVM beta gains must be non-negative")
        if any(sigma < 0 for sigma in self.sigmas.values()):
            raise DomainError("OVM response delays must be non-negative")

    @property
    def total_gain(self) -> float:
        return self.alpha + sum(self.betas.values())


def idm_desired_gap(v: float, v1: float, p: IdmParams) -> float:
    """Dynamic desired headway H(v, v1)."""
    return p.d + max(0.0, p.tau * v - v * (v1 - v) / math.sqrt(p.a0 * p.b0))


def idm_accel(h: float, v: float, v1: float, p: IdmParams) -> float:
    """IDM acceleration of a follower at headway h."""
    if h <= 0:
        raise DomainError(f"headway must be positive, got {h}")
    if v < 0 or v1 < 0:
        raise DomainError(f"speeds must be non-negative, got v={v}, v1={v1}")
    free = (v / p.v_max) ** p.delta
    interaction = (idm_desired_gap(v, v1, p) / h) ** 2
    return p.a0 * (1.0 - free - interaction)


def idm_equilibrium_headway(v: float, p: IdmParams) -> float:
    """Headway at which a follower at speed v behind a leader at v is in balance."""
    if v < 0:
        raise DomainError(f"speed must be non-negative, got {v}")
    remainder = 1.0 - (v / p.v_max) ** p.delta
    if remainder <= 0:
        raise DomainError(f"no equilibrium at or above v_max={p.v_max}, got v={v}")
    return (p.d + p.tau * v) / math.sqrt(remainder)


def idm_accel_array(h, v, v1, a0, b0, delta, tau, d, v_max) -> np.ndarray:
    """
    Vectorized IDM acceleration with broadcasting over all arguments.

    Non-positive headways are not rejected here; callers detect collisions
    and floor the result.
    """
    gap = d + np.maximum(0.0, tau * v - v * (v1 - v) / np.sqrt(a0 * b0))
    safe_h = np.where(h > 0, h, np.inf)
    interaction = np.where(h > 0, (gap / safe_h) ** 2, np.inf)
    return a0 * (1.0 - (v / v_max) ** delta - interaction)
