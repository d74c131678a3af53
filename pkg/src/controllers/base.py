"""
Common interface for longitudinal controllers driven by the simulation engine.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from ..dynamics import VehicleState


@dataclass(frozen=True)
class Observation:
    """
    What the ego knows at step k.

    ``visible`` maps vehicle index to (position, speed) for every vehicle the
    ego senses or hears over V2V; index 1 is always present.
    """
    k: int
    t: float
    ego: VehicleState
    visible: Dict[int, Tuple[float, float]]

    @property
    def s1(self) -> float:
        return self.visible[1][0]

    @property
    def v1(self) -> float:
        return self.visible[1][1]


@dataclass
class StepRecord:
    """Per-step diagnostics a controller may expose to the engine."""
    hidden_estimate: Optional[int] = None
    qp_status: Optional[str] = None
    slack: Optional[float] = None
    fallback: bool = False
    prediction: Optional[np.ndarray] = field(default=None, repr=False)


class Controller(ABC):
    """Base class for RACC, RCCC, PACC and PCCC."""

    name: str = "controller"
    dt: Optional[float] = None

    def __init__(self):
        self.last_record = StepRecord()

    @property
    def required_indices(self) -> Tuple[int, ...]:
        """Vehicle indices the controller needs in every observation."""
        return (1,)

    def reset(self) -> None:
        self.last_record = StepRecord()

    @abstractmethod
    def command(self, obs: Observation) -> float:
        """Desired acceleration a_d for this step."""
