"""
IDM rollout predictor seeded by the distant connected vehicle (PCCC).
"""

import numpy as np

from ..carfollow import IdmParams, simulate_chain
from ..carfollow.chain import ChainRollout
from ..errors import DomainError, OrderingError
from .constant_speed import Prediction


def uniform_flow_init(s1: float, v1: float, s_L: float, v_L: float, n_hidden: int):
    """
    Equally spaced hidden vehicles between vehicle 1 and vehicle L, all at
    the mean of the two bracketing speeds. Returned front to back.
    """
    spacing = (s_L - s1) / (n_hidden + 1)
    positions = s_L - spacing * np.arange(1, n_hidden + 1)
    speeds = np.full(n_hidden, 0.5 * (v1 + v_L))
    return positions, speeds


def rollout_behind(
    leader_s: np.ndarray,
    leader_v: np.ndarray,
    s1: float,
    v1: float,
    n_hidden: int,
    idm: IdmParams,
    dt: float,
    length: float,
    u_floor: float,
) -> ChainRollout:
    """
    Simulate hidden vehicles and vehicle 1 behind a given trajectory of L.

    Hidden vehicles start from uniform flow at the first sample; vehicle 1
    starts from its measured state. The last column is vehicle 1.
    """
    hidden_s, hidden_v = uniform_flow_init(s1, v1, leader_s[0], leader_v[0], n_hidden)
    init_s = np.concatenate((hidden_s, [s1]))
    init_v = np.concatenate((hidden_v, [v1]))
    return simulate_chain(leader_s, leader_v, init_s, init_v, idm, dt, length, u_floor)


def predict_idm_rollout(
    s1: float,
    v1: float,
    s_L: float,
    v_L: float,
    n_hat: int,
    idm: IdmParams,
    T: int,
    dt: float,
    length: float = 5.0,
    u_floor: float = -6.0,
) -> Prediction:
    """Predict vehicle 1 by rolling IDM followers behind a constant-speed vehicle L."""
    if s_L <= s1:
        raise OrderingError(f"connected vehicle at {s_L} m is not ahead of vehicle 1 at {s1} m")
    if n_hat < 0:
        raise DomainError(f"hidden vehicle count must be non-negative, got {n_hat}")
    if T < 1:
        raise DomainError(f"horizon must be at least one step, got {T}")
    k = np.arange(T + 1)
    leader_s = s_L + k * dt * v_L
    leader_v = np.full(T + 1, float(v_L))
    rollout = rollout_behind(leader_s, leader_v, s1, v1, n_hat, idm, dt, length, u_floor)
    return Prediction(
        s_hat=rollout.s[:, -1].copy(),
        v_hat=rollout.v[:, -1].copy(),
        dt=dt,
        hidden_s=rollout.s[:, :-1].copy() if n_hat > 0 else None,
    )
