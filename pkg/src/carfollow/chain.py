"""
Lockstep simulation of IDM vehicles behind a replayed leader.

All vehicles are advanced with the same exact kinematic step as the ego
plant, so backtests, forward predictions and the identification cost see the
same discretization.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .idm import IdmParams, idm_accel_array


@dataclass(frozen=True)
class IdmParamArrays:
    """IDM parameters as broadcastable arrays, one row per parameter set."""
    a0: np.ndarray
    b0: np.ndarray
    delta: np.ndarray
    tau: np.ndarray
    d: np.ndarray
    v_max: np.ndarray

    @classmethod
    def from_matrix(cls, x: np.ndarray) -> "IdmParamArrays":
        """Rows of ``x`` are (a0, b0, delta, tau, d, v_max) vectors."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return cls(*(x[:, j:j + 1] for j in range(6)))


ParamsLike = Union[IdmParams, IdmParamArrays]


@dataclass
class ChainRollout:
    """Positions and speeds [step, vehicle]; vehicle 0 directly follows the leader."""
    s: np.ndarray
    v: np.ndarray
    collision_step: Optional[int] = None

    @property
    def collided(self) -> bool:
        return self.collision_step is not None


def idm_step(s, v, ahead_s, ahead_v, p: ParamsLike, dt: float, length: float, u_floor: float):
    """
    One IDM step for any array of followers.

    Returns (s_next, v_next, collided) where ``collided`` flags followers that
    started the step at a non-positive headway. Accelerations are floored at
    ``u_floor`` and stopping is exact.
    """
    h = ahead_s - s - length
    a = idm_accel_array(h, v, np.maximum(ahead_v, 0.0), p.a0, p.b0, p.delta, p.tau, p.d, p.v_max)
    a = np.maximum(a, u_floor)
    v_next = v + dt * a
    stopping = v_next < 0
    s_next = np.where(
        stopping,
        s - v * v / (2.0 * np.where(stopping, a, -1.0)),
        s + dt * v + 0.5 * dt * dt * a,
    )
    return s_next, np.maximum(v_next, 0.0), h <= 0


def simulate_chain(
    leader_s: np.ndarray,
    leader_v: np.ndarray,
    init_s: np.ndarray,
    init_v: np.ndarray,
    p: IdmParams,
    dt: float,
    length: float,
    u_floor: float,
) -> ChainRollout:
    """
    Roll a chain of IDM followers behind a leader trajectory.

    ``leader_s``/``leader_v`` hold n+1 samples; the result has n+1 rows with
    row 0 equal to the initial state. Followers are ordered front to back.
    """
    leader_s = np.asarray(leader_s, dtype=float)
    leader_v = np.asarray(leader_v, dtype=float)
    n_steps = leader_s.shape[0] - 1
    m = len(init_s)
    s = np.empty((n_steps + 1, m))
    v = np.empty((n_steps + 1, m))
    s[0] = init_s
    v[0] = init_v
    collision_step = None
    for k in range(n_steps):
        ahead_s = np.concatenate(([leader_s[k]], s[k, :-1]))
        ahead_v = np.concatenate(([leader_v[k]], v[k, :-1]))
        s[k + 1], v[k + 1], collided = idm_step(
            s[k], v[k], ahead_s, ahead_v, p, dt, length, u_floor
        )
        if collision_step is None and collided.any():
            collision_step = k
    if collision_step is None and m > 0:
        ahead_s = np.concatenate(([leader_s[-1]], s[-1, :-1]))
        if np.any(ahead_s - s[-1] - length <= 0):
            collision_step = n_steps
    return ChainRollout(s=s, v=v, collision_step=collision_step)
