"""
Longitudinal plant of the automated ego vehicle.

The plant integrates the ideal dynamics s' = v, v' = sat(a_d(t - sigma))
exactly for piecewise-constant acceleration. Resistance is assumed to be
perfectly compensated, so it only enters the energy accounting.
"""

from collections import deque
from dataclasses import dataclass
from typing import Deque, Iterable, Optional, Tuple
import logging

from ..errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VehicleParams:
    """Resistance, actuation envelope, length and powertrain delay of the ego."""
    c0: float = 0.0147
    c2: float = 2.75e-4
    u_min: float = -6.0
    m1: float = 0.285
    b1: float = 2.0
    m2: float = -0.121
    b2: float = 4.83
    u_max_cap: Optional[float] = None
    length: float = 5.0
    sigma: float = 0.6

    def __post_init__(self):
        if self.c0 < 0 or self.c2 < 0:
            raise DomainError("resistance coefficients must be non-negative")
        if self.u_min >= 0:
            raise DomainError(f"u_min must be negative, got {self.u_min}")
        if self.sigma < 0:
            raise DomainError(f"powertrain delay must be non-negative, got {self.sigma}")
        if self.length < 0:
            raise DomainError(f"vehicle length must be non-negative, got {self.length}")

    def u_max(self, v: float) -> float:
        """Upper acceleration limit at speed v."""
        limit = min(self.m1 * v + self.b1, self.m2 * v + self.b2)
        if self.u_max_cap is not None:
            limit = min(limit, self.u_max_cap)
        return limit

    def check_envelope(self, v_max: float) -> None:
        """Raise unless the upper limit stays positive on [0, v_max]."""
        # both envelope lines are affine, so checking the end points suffices
        for v in (0.0, v_max):
            if self.u_max(v) <= 0:
                raise DomainError(
                    f"acceleration envelope is not positive at v={v:.2f} m/s"
                )

    def delay_steps(self, dt: float) -> int:
        """Number of simulation steps q covered by the powertrain delay."""
        if dt <= 0:
            raise DomainError(f"time step must be positive, got {dt}")
        q = int(round(self.sigma / dt))
        if abs(q * dt - self.sigma) > 1e-9:
            raise DomainError(
                f"sigma={self.sigma} s is not an integer multiple of dt={dt} s"
            )
        return q


@dataclass(frozen=True)
class VehicleState:
    """Position, velocity and realized acceleration of one vehicle."""
    s: float
    v: float
    a: float = 0.0


class DelayBuffer:
    """Fixed-length queue of desired accelerations waiting in the powertrain."""

    def __init__(self, q: int, initial: float = 0.0):
        if q < 0:
            raise DomainError(f"delay length must be non-negative, got {q}")
        self.q = q
        self._queue: Deque[float] = deque([initial] * q)

    @classmethod
    def from_commands(cls, commands: Iterable[float]) -> "DelayBuffer":
        commands = list(commands)
        buffer = cls(len(commands))
        buffer._queue = deque(float(c) for c in commands)
        return buffer

    def push(self, a_d: float) -> float:
        """Queue a new command and return the one that leaves the powertrain now."""
        if self.q == 0:
            return a_d
        delayed = self._queue.popleft()
        self._queue.append(a_d)
        return delayed

    def pending(self) -> Tuple[float, ...]:
        """Commands still in flight, oldest first."""
        return tuple(self._queue)

    def copy(self) -> "DelayBuffer":
        return DelayBuffer.from_commands(self._queue)

    def __len__(self) -> int:
        return len(self._queue)


def resistance(v: float, p: VehicleParams) -> float:
    """Acceleration-equivalent rolling and air resistance f(v)."""
    if v < 0:
        raise DomainError(f"speed must be non-negative, got {v}")
    return p.c0 + p.c2 * v * v


def saturate(u: float, v: float, p: VehicleParams) -> float:
    """Clip a commanded acceleration to the envelope at speed v."""
    return min(p.u_max(v), max(p.u_min, u))


def kinematic_step(s: float, v: float, a: float, dt: float) -> Tuple[float, float, float]:
    """
    Advance (s, v) by one step of constant acceleration a.

    Speed never turns negative: when the step would reverse the vehicle it
    stops exactly, stays at rest for the remainder of the step, and the
    returned acceleration is the mean acceleration -v/dt of the step.
    """
    v_next = v + dt * a
    if v_next >= 0:
        return s + dt * v + 0.5 * dt * dt * a, v_next, a
    # a < 0 here; stop at t_stop = -v / a <= dt
    return s - v * v / (2.0 * a), 0.0, -v / dt


def step(
    state: VehicleState,
    buffer: DelayBuffer,
    a_d: float,
    dt: float,
    p: VehicleParams,
) -> Tuple[VehicleState, DelayBuffer]:
    """
    Apply one control period to the plant.

    The returned state carries the acceleration realized during the step.
    The buffer is mutated in place and returned for convenience.
    """
    if dt <= 0:
        raise DomainError(f"time step must be positive, got {dt}")
    a_delayed = buffer.push(a_d)
    a = saturate(a_delayed, state.v, p)
    s_next, v_next, a_real = kinematic_step(state.s, state.v, a, dt)
    return VehicleState(s=s_next, v=v_next, a=a_real), buffer


def realized_commands(
    state: VehicleState, commands: Iterable[float], dt: float, p: VehicleParams
) -> Tuple[float, ...]:
    """Accelerations the plant will realize for already-issued commands."""
    realized = []
    s, v = state.s, state.v
    for command in commands:
        s, v, a = kinematic_step(s, v, saturate(command, v, p), dt)
        realized.append(a)
    return tuple(realized)

