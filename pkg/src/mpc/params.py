"""
Parameters of the predictive controllers.
"""

from dataclasses import dataclass, field

from ..carfollow import RangePolicyParams
from ..dynamics import VehicleParams
from ..errors import DomainError


@dataclass(frozen=True)
class MpcConfig:
    """
    Receding-horizon settings.

    Weights follow the tuned predictive controller: headway tracking q_g,
    control effort q_a and the safety slack penalty q_eps. The chance level
    decreases linearly from ``alpha_start`` at k = 1 to ``alpha_end`` at
    k = K and stays there.
    """
    dt: float = 0.1
    T: int = 100
    q_g: float = 1.0
    q_a: float = 960.0
    q_eps: float = 1e6
    range: RangePolicyParams = field(default_factory=RangePolicyParams)
    d_min: float = 3.0
    tau_min: float = 0.67
    sigma_a1: float = 0.6
    alpha_start: float = 0.99
    alpha_end: float = 0.5
    K: int = 100
    v_max: float = 35.0
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    max_iterations: int = 200

    def __post_init__(self):
        if self.dt <= 0:
            raise DomainError(f"time step must be positive, got {self.dt}")
        if self.T < 1:
            raise DomainError(f"horizon must be at least one step, got {self.T}")
        if self.q_g <= 0 or self.q_a <= 0:
            raise DomainError("q_g and q_a must be positive")
        if self.q_eps <= self.q_a:
            raise DomainError(f"q_eps={self.q_eps} must dominate q_a={self.q_a}")
        if not 0.5 <= self.alpha_end <= self.alpha_start < 1.0:
            raise DomainError(
                f"chance levels need 0.5 <= end <= start < 1, got {self.alpha_start}, {self.alpha_end}"
            )
        if self.K < 1:
            raise DomainError(f"K must be at least 1, got {self.K}")
        if self.sigma_a1 < 0 or self.d_min < 0 or self.tau_min < 0:
            raise DomainError("noise level and safety floor must be non-negative")
        if self.max_iterations < 1:
            raise DomainError("solver needs at least one iteration")
        self.vehicle.check_envelope(self.v_max)

    @property
    def q(self) -> int:
        """Delay steps of the powertrain."""
        return self.vehicle.delay_steps(self.dt)

    @property
    def n_commands(self) -> int:
        return self.T + self.q
