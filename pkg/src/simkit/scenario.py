"""
Recorded traffic scenarios: CSV ingestion, validation and persistence.

Scenario files carry a header ``t,s_1,v_1,...,s_N,v_N`` where vehicle 1 is
the one immediately ahead of the ego. An optional YAML sidecar named
``<stem>.meta.yaml`` carries the label, V2V connectivity, the true number of
hidden vehicles for synthetic data, and the vehicle length.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union
import logging

import numpy as np
import pandas as pd
import yaml

from ..errors import DomainError, OrderingError, ScenarioParseError

logger = logging.getLogger(__name__)

LABELS = ("free-flow", "step", "congested", "custom")
DT_TOLERANCE = 1e-9
FLOAT_FORMAT = "%.6f"


@dataclass
class Trajectory:
    """Uniformly sampled positions and speeds of one vehicle."""
    dt: float
    s: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.s.shape != self.v.shape:
            raise DomainError("position and speed series differ in length")
        if np.any(self.v < 0):
            raise DomainError("trajectory speeds must be non-negative")

    def __len__(self) -> int:
        return len(self.s)


@dataclass
class Scenario:
    """
    Replay data for vehicles 1..L.

    ``positions`` and ``speeds`` are [step, vehicle] arrays with column i - 1
    holding vehicle i.
    """
    dt: float
    positions: np.ndarray
    speeds: np.ndarray
    label: str = "custom"
    connectivity: Tuple[int, ...] = ()
    true_hidden: Optional[int] = None
    length: float = 5.0
    t0: float = 0.0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.speeds = np.asarray(self.speeds, dtype=float)
        if self.positions.shape != self.speeds.shape or self.positions.ndim != 2:
            raise DomainError("positions and speeds must be matching [step, vehicle] arrays")
        if self.label not in LABELS:
            raise DomainError(f"unknown scenario label {self.label!r}, expected one of {LABELS}")
        if not self.connectivity:
            self.connectivity = tuple(sorted({1, self.n_vehicles}))

    @property
    def n_vehicles(self) -> int:
        return self.positions.shape[1]

    @property
    def n_samples(self) -> int:
        return self.positions.shape[0]

    @property
    def duration(self) -> float:
        return (self.n_samples - 1) * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_samples)

    def trajectory(self, index: int) -> Trajectory:
        """Trajectory of vehicle ``index`` (1-based)."""
        if not 1 <= index <= self.n_vehicles:
            raise DomainError(f"vehicle {index} not in scenario with {self.n_vehicles} vehicles")
        return Trajectory(self.dt, self.positions[:, index - 1], self.speeds[:, index - 1])


def expected_header(n_vehicles: int):
    columns = ["t"]
    for i in range(1, n_vehicles + 1):
        columns += [f"s_{i}", f"v_{i}"]
    return columns


def sidecar_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.yaml")


def _parse_frame(path: Path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ScenarioParseError(f"{path}: {e}") from e

    columns = [c.strip() for c in frame.columns]
    n_vehicles = (len(columns) - 1) // 2
    if n_vehicles < 1 or columns != expected_header(n_vehicles):
        raise ScenarioParseError(
            f"header must be t,s_1,v_1,...,s_N,v_N, got {','.join(columns)}", line=1
        )
    frame.columns = columns
    if len(frame) < 2:
        raise ScenarioParseError("scenario needs at least two samples")

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = np.argwhere(~np.isfinite(numeric.to_numpy(dtype=float)))
    if len(bad):
        row, col = int(bad[0, 0]), columns[int(bad[0, 1])]
        raise ScenarioParseError(f"non-numeric or missing value in column {col}", line=row + 2)
    return numeric.astype(float)


def load_scenario(path: Union[str, Path], length: Optional[float] = None) -> Scenario:
    """
    Parse and validate a scenario CSV (and its sidecar, if present).

    Raises:
        ScenarioParseError: malformed header, non-numeric values, NaNs,
            non-uniform time steps or negative speeds, with the file line.
        OrderingError: a vehicle is not ahead of its follower by more than
            one vehicle length; ``row`` is the file line.
    """
    path = Path(path)
    meta: Dict[str, Any] = {}
    if sidecar_path(path).exists():
        meta = yaml.safe_load(sidecar_path(path).read_text()) or {}

    frame = _parse_frame(path)
    t = frame["t"].to_numpy()
    steps = np.diff(t)
    dt = float(steps[0])
    if dt <= 0:
        raise ScenarioParseError("time stamps must increase", line=3)
    uneven = np.flatnonzero(np.abs(steps - dt) > DT_TOLERANCE)
    if len(uneven):
        raise ScenarioParseError(
            f"non-uniform time step {steps[uneven[0]]:.9g} s, expected {dt:.9g} s",
            line=int(uneven[0]) + 3,
        )

    values = frame.to_numpy()[:, 1:]
    positions = values[:, 0::2]
    speeds = values[:, 1::2]
    negative = np.argwhere(speeds < 0)
    if len(negative):
        raise ScenarioParseError(
            f"negative speed for vehicle {negative[0, 1] + 1}", line=int(negative[0, 0]) + 2
        )

    vehicle_length = float(length if length is not None else meta.get("length", 5.0))
    if positions.shape[1] > 1:
        gaps = np.diff(positions, axis=1) - vehicle_length
        crowded = np.argwhere(gaps <= 0)
        if len(crowded):
            row, col = int(crowded[0, 0]), int(crowded[0, 1])
            raise OrderingError(
                f"{path}: s_{col + 2} - s_{col + 1} must exceed {vehicle_length} m",
                row=row + 2,
            )

    label = meta.get("label", "custom")
    connectivity = tuple(meta.get("connectivity", ()))
    scenario = Scenario(
        dt=dt,
        positions=positions,
        speeds=speeds,
        label=label,
        connectivity=connectivity,
        true_hidden=meta.get("true_hidden"),
        length=vehicle_length,
        t0=float(t[0]),
    )
    logger.info(
        f"Loaded scenario {path.name}: {scenario.n_vehicles} vehicles, "
        f"{scenario.n_samples} samples, dt={dt:g} s"
    )
    return scenario


def scenario_frame(scenario: Scenario) -> pd.DataFrame:
    data = {"t": scenario.times}
    for i in range(1, scenario.n_vehicles + 1):
        data[f"s_{i}"] = scenario.positions[:, i - 1]
        data[f"v_{i}"] = scenario.speeds[:, i - 1]
    return pd.DataFrame(data, columns=expected_header(scenario.n_vehicles))


def save_scenario(scenario: Scenario, path: Union[str, Path], sidecar: bool = True) -> Path:
    """Write the scenario CSV with fixed precision, plus the YAML sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    scenario_frame(scenario).to_csv(
        path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    if sidecar:
        meta = {
            "label": scenario.label,
            "connectivity": list(scenario.connectivity),
            "true_hidden": scenario.true_hidden,
            "length": scenario.length,
        }
        sidecar_path(path).write_text(yaml.safe_dump(meta, sort_keys=True))
    return path
