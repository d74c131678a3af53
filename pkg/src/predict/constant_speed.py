"""
Prediction container and the constant-speed predictor used by PACC.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import DomainError


@dataclass
class Prediction:
    """
    Predicted motion of vehicle 1 over k = 0..T.

    ``hidden_s`` optionally holds the rolled-out positions of simulated hidden
    vehicles, one column per vehicle, front to back.
    """
    s_hat: np.ndarray
    v_hat: np.ndarray
    dt: float
    hidden_s: Optional[np.ndarray] = None

    @property
    def horizon(self) -> int:
        return len(self.s_hat) - 1


def predict_constant_speed(s1: float, v1: float, T: int, dt: float) -> Prediction:
    """Assume the vehicle ahead keeps its current speed."""
    if v1 < 0:
        raise DomainError(f"speed must be non-negative, got {v1}")
    if T < 1:
        raise DomainError(f"horizon must be at least one step, got {T}")
    k = np.arange(T + 1)
    return Prediction(s_hat=s1 + k * dt * v1, v_hat=np.full(T + 1, float(v1)), dt=dt)
