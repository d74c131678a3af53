"""
Synthetic scenarios: a lead vehicle driving a speed program followed by a
chain of IDM drivers.

The lead vehicle is vehicle L (the last scenario column); followers are
started at the IDM equilibrium spacing for the initial lead speed and rolled
forward with the same integrator the predictors use.
"""

from typing import Optional
import logging

import numpy as np
from scipy import signal

from ..carfollow import IdmParams, idm_equilibrium_headway, simulate_chain
from ..errors import DomainError, OrderingError
from .scenario import Scenario

logger = logging.getLogger(__name__)

KINDS = ("free-flow", "step", "congested")

FREE_FLOW_SPEED = 30.0
FREE_FLOW_JITTER = 0.5
STEP_PLATEAUS = (18.0, 27.0)
CONGESTED_HIGH = 20.0
CONGESTED_LOW = 8.0


def free_flow_program(n: int, dt: float, rng: np.random.Generator) -> np.ndarray:
    """30 m/s with slow jitter scaled to exactly +-0.5 m/s."""
    noise = rng.standard_normal(n)
    b, a = signal.butter(2, 0.02 / (0.5 / dt))
    jitter = signal.filtfilt(b, a, noise)
    peak = np.max(np.abs(jitter))
    if peak > 0:
        jitter *= FREE_FLOW_JITTER / peak
    return FREE_FLOW_SPEED + jitter


def step_program(n: int, dt: float, rng: np.random.Generator) -> np.ndarray:
    """Start from halt, accelerate to 18 m/s, later to 27 m/s; plateaus are exact."""
    t = dt * np.arange(n)
    duration = t[-1] if n > 1 else 0.0
    t_first = 5.0 + rng.uniform(0.0, 5.0)
    t_second = max(0.4 * duration, t_first + 30.0)
    low, high = STEP_PLATEAUS
    first = np.clip((t - t_first) * 1.5, 0.0, low)
    second = np.clip((t - t_second) * 1.0, 0.0, high - low)
    return first + second


def congested_program(n: int, dt: float, rng: np.random.Generator) -> np.ndarray:
    """Repeated 20 -> 8 -> 20 m/s cycles with seeded hold times."""
    duration = dt * (n - 1)
    brake_time = (CONGESTED_HIGH - CONGESTED_LOW) / 1.5
    accel_time = (CONGESTED_HIGH - CONGESTED_LOW) / 1.0
    knots_t = [0.0]
    knots_v = [CONGESTED_HIGH]
    t = 0.0
    while t < duration:
        t += rng.uniform(8.0, 15.0)
        knots_t.append(t)
        knots_v.append(CONGESTED_HIGH)
        t += brake_time
        knots_t.append(t)
        knots_v.append(CONGESTED_LOW)
        t += rng.uniform(5.0, 12.0)
        knots_t.append(t)
        knots_v.append(CONGESTED_LOW)
        t += accel_time
        knots_t.append(t)
        knots_v.append(CONGESTED_HIGH)
    return np.interp(dt * np.arange(n), knots_t, knots_v)


PROGRAMS = {
    "free-flow": free_flow_program,
    "step": step_program,
    "congested": congested_program,
}


def integrate_positions(v: np.ndarray, dt: float, s0: float = 0.0) -> np.ndarray:
    """Trapezoidal positions for a sampled speed profile."""
    s = np.empty_like(v)
    s[0] = s0
    s[1:] = s0 + np.cumsum(0.5 * dt * (v[1:] + v[:-1]))
    return s


def generate_synthetic(
    kind: str,
    seed: int = 0,
    chain_len: int = 6,
    idm: Optional[IdmParams] = None,
    duration: float = 300.0,
    dt: float = 0.1,
    length: float = 5.0,
    u_floor: float = -6.0,
) -> Scenario:
    """
    Build a deterministic scenario of ``chain_len`` vehicles.

    Vehicle L = chain_len drives the speed program; vehicles L-1..1 are IDM
    followers. V2V connectivity is {1, L}, so the true hidden count is L - 2.
    """
    if kind not in PROGRAMS:
        raise DomainError(f"unknown synthetic scenario {kind!r}, expected one of {KINDS}")
    if chain_len < 2:
        raise DomainError(f"a scenario needs at least two vehicles, got {chain_len}")
    idm = idm or IdmParams()
    n = int(round(duration / dt)) + 1
    rng = np.random.default_rng(seed)
    lead_v = PROGRAMS[kind](n, dt, rng)

    n_followers = chain_len - 1
    spacing = idm_equilibrium_headway(float(lead_v[0]), idm) + length
    lead_s = integrate_positions(lead_v, dt, s0=n_followers * spacing)
    init_s = lead_s[0] - spacing * np.arange(1, n_followers + 1)
    init_v = np.full(n_followers, lead_v[0])
    rollout = simulate_chain(lead_s, lead_v, init_s, init_v, idm, dt, length, u_floor)
    if rollout.collided:
        raise OrderingError(
            f"IDM follower collided at step {rollout.collision_step} in {kind} scenario",
            row=rollout.collision_step,
        )

    # scenario columns run from vehicle 1 (rearmost follower) to L (lead)
    positions = np.column_stack((rollout.s[:, ::-1], lead_s))
    speeds = np.column_stack((rollout.v[:, ::-1], lead_v))
    logger.info(f"Generated {kind} scenario: {chain_len} vehicles, {duration:g} s, seed {seed}")
    return Scenario(
        dt=dt,
        positions=positions,
        speeds=speeds,
        label=kind,
        connectivity=(1, chain_len),
        true_hidden=chain_len - 2,
        length=length,
    )
