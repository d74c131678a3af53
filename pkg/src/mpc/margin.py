"""
Probabilistic safety margin for the predicted position of vehicle 1.

The acceleration of vehicle 1 is modelled as the deterministic prediction
plus one Gaussian offset e ~ N(0, sigma_a1^2) held over the whole horizon.
The position error after k steps is then Gaussian with variance
b_k * sigma_a1^2, and the safety row is tightened so that it holds with
probability alpha(k).
"""

from typing import Optional

import numpy as np
from scipy.stats import norm

from ..errors import DomainError
from .params import MpcConfig


def chance_level(k: int, cfg: MpcConfig) -> float:
    """Linear schedule from alpha_start at k = 1 to alpha_end at k = K."""
    if k >= cfg.K:
        return cfg.alpha_end
    if cfg.K == 1:
        return cfg.alpha_end
    return cfg.alpha_start + (cfg.alpha_end - cfg.alpha_start) * (k - 1) / (cfg.K - 1)


def noise_gain(n_steps: int, dt: float) -> np.ndarray:
    """
    Stacked response of [s(k), v(k)], k = 1..n_steps, to a unit acceleration
    offset applied at every step.

    Block k equals A^(k-1) B + ... + A B + B for the double integrator.
    """
    A = np.array([[1.0, dt], [0.0, 1.0]])
    B = np.array([0.5 * dt * dt, dt])
    gain = np.empty(2 * n_steps)
    block = np.zeros(2)
    for k in range(n_steps):
        block = A @ block + B
        gain[2 * k:2 * k + 2] = block
    return gain


def position_variance_factors(n_steps: int, dt: float) -> np.ndarray:
    """b_k for k = 1..n_steps: the position diagonal of gain @ gain.T."""
    gain = noise_gain(n_steps, dt)
    return gain[0::2] ** 2


def safety_margin(k: int, cfg: MpcConfig) -> float:
    if k < 1:
        raise DomainError(f"safety margin is defined for k >= 1, got {k}")
    b_k = position_variance_factors(k, cfg.dt)[-1]
    sigma_s1 = np.sqrt(b_k) * cfg.sigma_a1
    return max(0.0, float(sigma_s1 * norm.ppf(chance_level(k, cfg))))


def safety_margin_profile(cfg: MpcConfig, n_steps: Optional[int] = None) -> np.ndarray:
    """Margins for k = 0..n_steps (default T); the current step gets none."""
    n_steps = cfg.T if n_steps is None else n_steps
    profile = np.zeros(n_steps + 1)
    if n_steps == 0:
        return profile
    sigma_s1 = np.sqrt(position_variance_factors(n_steps, cfg.dt)) * cfg.sigma_a1
    alphas = np.array([chance_level(k, cfg) for k in range(1, n_steps + 1)])
    profile[1:] = np.maximum(0.0, sigma_s1 * norm.ppf(alphas))
    return profile
