"""
Tractive energy accounting per unit mass.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DomainError
from .plant import VehicleParams, resistance


@dataclass(frozen=True)
class EnergyLedger:
    """Cumulative energy per unit mass [J/kg] and the time it was last updated."""
    w: float = 0.0
    t: float = 0.0


def tractive_power(v: float, a: float, p: VehicleParams) -> float:
    """v * g(a + f(v)) with g(x) = max(x, 0); braking recovers nothing."""
    return v * max(a + resistance(v, p), 0.0)


def accumulate_energy(
    ledger: EnergyLedger, v: float, a: float, p: VehicleParams, dt: float
) -> EnergyLedger:
    """Add one left-endpoint rectangle of tractive power to the ledger."""
    if dt <= 0:
        raise DomainError(f"time step must be positive, got {dt}")
    return EnergyLedger(w=ledger.w + tractive_power(v, a, p) * dt, t=ledger.t + dt)


def integrate_energy(
    v: Sequence[float], a: Sequence[float], p: VehicleParams, dt: float
) -> float:
    """Energy of a whole sampled trajectory, same quadrature as the ledger."""
    v = np.asarray(v, dtype=float)
    a = np.asarray(a, dtype=float)
    if v.shape != a.shape:
        raise DomainError("speed and acceleration series differ in length")
    if v.size == 0:
        return 0.0
    if np.any(v < 0):
        raise DomainError("speed series contains negative values")
    power = v * np.maximum(a + (p.c0 + p.c2 * v * v), 0.0)
    # sequential sum keeps this bit-compatible with repeated ledger updates
    w = 0.0
    for value in power:
        w += float(value) * dt
    return w
