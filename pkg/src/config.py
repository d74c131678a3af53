"""
Configuration management for the connected cruise control lab.

Parameters are grouped in pydantic models and resolved in this order:
built-in defaults, the selected preset, the YAML file, explicit overrides.
Every group converts to the frozen dataclass the numerical code uses.
"""

from pathlib import Path
from typing import Any, Dict, Optional
import copy
import logging

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .carfollow import IDM_BOUNDS, IdmParams, OvmParams, RangePolicyParams
from .controllers import (
    CONTROLLER_NAMES,
    Controller,
    PaccController,
    PcccController,
    RaccController,
    RcccController,
)
from .dynamics import VehicleParams
from .errors import ConfigurationError, DomainError
from .mpc import MpcConfig
from .predict import EstimatorParams

logger = logging.getLogger(__name__)


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class VehicleConfig(StrictModel):
    """Ego plant: resistance, acceleration envelope, length and delay."""
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

    def to_params(self) -> VehicleParams:
        return VehicleParams(**self.model_dump())


class RangePolicyConfig(StrictModel):
    """Desired range policy shared by every controller."""
    tau: float = 1.67
    d: float = 5.0
    v_max: float = 35.0

    def to_params(self) -> RangePolicyParams:
        return RangePolicyParams(**self.model_dump())


class ReactiveGains(StrictModel):
    alpha: float = 0.4
    beta_1: float = 0.6617
    beta_L: float = 0.0
    sigma_L: float = 0.0


class OvmConfig(StrictModel):
    """Gains of the reactive controllers."""
    racc: ReactiveGains = Field(default_factory=ReactiveGains)
    rccc: ReactiveGains = Field(
        default_factory=lambda: ReactiveGains(beta_1=0.3041, beta_L=1.0277, sigma_L=5.3372)
    )


class IdmConfig(StrictModel):
    """IDM used for synthetic traffic and the PCCC rollouts."""
    a0: float = 2.2868
    b0: float = 8.5
    delta: float = 3.0
    tau: float = 0.9282
    d: float = 5.0
    v_max: float = 32.8682

    @model_validator(mode="after")
    def check_bounds(self):
        for name, (lo, hi) in IDM_BOUNDS.items():
            value = getattr(self, name)
            if not lo <= value <= hi:
                raise ValueError(f"IDM {name}={value} outside [{lo}, {hi}]")
        return self

    def to_params(self) -> IdmParams:
        return IdmParams(**self.model_dump())


class MpcConfigModel(StrictModel):
    """Predictive controller weights, horizon and chance schedule."""
    T: int = 100
    q_g: float = 1.0
    q_a: float = 960.0
    q_eps: float = 1e6
    d_min: float = 3.0
    tau_min: float = 0.67
    sigma_a1: float = 0.6
    alpha_start: float = 0.99
    alpha_end: float = 0.5
    K: int = 100
    v_max: float = 35.0
    max_iterations: int = 200


class EstimatorConfig(StrictModel):
    """Hidden-vehicle estimator windows and weights."""
    history_cap: float = 23.0
    score_cap: float = 5.0
    mismatch_weight: float = 1.5
    warmup: float = 1.0
    d_min: float = 3.0
    tau_min: float = 0.67


class SimulationConfig(StrictModel):
    dt: float = 0.1
    duration: float = 300.0
    chain_len: int = 6
    audit_threshold: float = 0.5
    fallback_threshold: float = 0.01
    estimator_warmup: float = 30.0

    @field_validator("dt", "duration")
    @classmethod
    def positive(cls, v):
        if v <= 0:
            raise ValueError(f"must be positive, got {v}")
        return v

    @field_validator("chain_len")
    @classmethod
    def chain_has_leader(cls, v):
        if v < 2:
            raise ValueError(f"chain needs at least two vehicles, got {v}")
        return v


class IdentConfig(StrictModel):
    n_starts: int = 8
    max_evaluations: int = 2000
    mesh_tol: float = 1e-4


class LoggingConfig(StrictModel):
    """Logging configuration."""
    level: str = "INFO"
    file: Optional[str] = None
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class LabConfig(StrictModel):
    """Every typed parameter of the lab."""
    preset: str = "step"
    vehicle: VehicleConfig = Field(default_factory=VehicleConfig)
    range: RangePolicyConfig = Field(default_factory=RangePolicyConfig)
    ovm: OvmConfig = Field(default_factory=OvmConfig)
    idm: IdmConfig = Field(default_factory=IdmConfig)
    mpc: MpcConfigModel = Field(default_factory=MpcConfigModel)
    estimator: EstimatorConfig = Field(default_factory=EstimatorConfig)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    ident: IdentConfig = Field(default_factory=IdentConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)


# Reactive gains and identified IDM parameters per dataset type.
PRESETS: Dict[str, Dict[str, Any]] = {
    "freeflow": {
        "ovm": {
            "racc": {"alpha": 0.4, "beta_1": 0.6617},
            "rccc": {"alpha": 0.4, "beta_1": 0.3041, "beta_L": 1.0277, "sigma_L": 5.3372},
        },
        "idm": {"a0": 0.684, "b0": 2.9693, "delta": 3.3066, "tau": 0.7154, "d": 5.0001, "v_max": 36.0},
    },
    "step": {
        "ovm": {
            "racc": {"alpha": 0.4, "beta_1": 0.4728},
            "rccc": {"alpha": 0.4, "beta_1": 0.2163, "beta_L": 1.1459, "sigma_L": 1.7432},
        },
        "idm": {"a0": 2.2868, "b0": 8.5, "delta": 3.0, "tau": 0.9282, "d": 5.0, "v_max": 32.8682},
    },
    "congested": {
        "ovm": {
            "racc": {"alpha": 0.4, "beta_1": 0.4857},
            "rccc": {"alpha": 0.4, "beta_1": 0.2410, "beta_L": 0.9895, "sigma_L": 2.4331},
        },
        "idm": {"a0": 2.5732, "b0": 8.5, "delta": 4.3393, "tau": 0.6409, "d": 5.067, "v_max": 36.0},
    },
}

# synthetic scenario kind matching each preset
PRESET_SCENARIOS = {"freeflow": "free-flow", "step": "step", "congested": "congested"}


class Settings(BaseSettings):
    """Environment overrides (prefix CCC_, optional .env file)."""
    model_config = SettingsConfigDict(
        env_prefix="CCC_", env_file=".env", env_file_encoding="utf-8", case_sensitive=False,
        extra="ignore",
    )

    log_level: Optional[str] = None
    log_file: Optional[str] = None
    workers: int = 1
    config_file: Optional[str] = None


def deep_merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge ``update`` into a copy of ``base``."""
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


class Config:
    """Main configuration class."""

    def __init__(
        self,
        config_file: Optional[str] = None,
        preset: Optional[str] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ):
        self.settings = Settings()
        explicit = config_file or self.settings.config_file
        self.config_file = Path(explicit or "config.yaml")
        file_data = self._load_yaml_config(required=explicit is not None)

        self.presets = deep_merge(PRESETS, file_data.pop("presets", None) or {})
        name = preset or file_data.get("preset") or "step"
        if name not in self.presets:
            raise ConfigurationError(
                f"unknown preset {name!r}, expected one of {sorted(self.presets)}"
            )
        merged = deep_merge(self.presets[name], file_data)
        merged = deep_merge(merged, overrides or {})
        merged["preset"] = name
        try:
            self.lab = LabConfig.model_validate(merged)
        except ValidationError as e:
            raise ConfigurationError(f"invalid configuration: {e}") from e

        if self.settings.log_level:
            self.lab.logging.level = self.settings.log_level
        if self.settings.log_file:
            self.lab.logging.file = self.settings.log_file
        self._check_consistency()

    def _load_yaml_config(self, required: bool) -> Dict[str, Any]:
        """Load YAML configuration file."""
        if not self.config_file.exists():
            if required:
                raise ConfigurationError(f"config file {self.config_file} not found")
            return {}
        try:
            with open(self.config_file, "r") as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"cannot parse {self.config_file}: {e}") from e
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigurationError(f"{self.config_file} must hold a mapping")
        return data

    def _check_consistency(self) -> None:
        try:
            self.vehicle_params().delay_steps(self.lab.simulation.dt)
            self.mpc_params()
        except DomainError as e:
            raise ConfigurationError(str(e)) from e

    @property
    def preset(self) -> str:
        return self.lab.preset

    @property
    def workers(self) -> int:
        return max(1, self.settings.workers)

    def get_logging_config(self) -> LoggingConfig:
        return self.lab.logging

    def vehicle_params(self) -> VehicleParams:
        return self.lab.vehicle.to_params()

    def range_params(self) -> RangePolicyParams:
        return self.lab.range.to_params()

    def idm_params(self) -> IdmParams:
        return self.lab.idm.to_params()

    def mpc_params(self) -> MpcConfig:
        m = self.lab.mpc
        return MpcConfig(
            dt=self.lab.simulation.dt,
            T=m.T,
            q_g=m.q_g,
            q_a=m.q_a,
            q_eps=m.q_eps,
            range=self.range_params(),
            d_min=m.d_min,
            tau_min=m.tau_min,
            sigma_a1=m.sigma_a1,
            alpha_start=m.alpha_start,
            alpha_end=m.alpha_end,
            K=m.K,
            v_max=m.v_max,
            vehicle=self.vehicle_params(),
            max_iterations=m.max_iterations,
        )

    def estimator_params(self) -> EstimatorParams:
        e = self.lab.estimator
        return EstimatorParams(
            history_cap=e.history_cap,
            score_cap=e.score_cap,
            mismatch_weight=e.mismatch_weight,
            warmup=e.warmup,
            d_min=e.d_min,
            tau_min=e.tau_min,
            range=self.range_params(),
        )

    def ovm_params(self, controller: str, connected_index: Optional[int] = None) -> OvmParams:
        """OVM gains of ``racc`` or ``rccc``; RCCC listens to ``connected_index``."""
        if controller == "racc":
            g = self.lab.ovm.racc
            return OvmParams(alpha=g.alpha, betas={1: g.beta_1}, range=self.range_params())
        if controller == "rccc":
            if connected_index is None or connected_index < 2:
                raise ConfigurationError("RCCC needs a connected vehicle index >= 2")
            g = self.lab.ovm.rccc
            return OvmParams(
                alpha=g.alpha,
                betas={1: g.beta_1, connected_index: g.beta_L},
                sigmas={connected_index: g.sigma_L},
                range=self.range_params(),
            )
        raise ConfigurationError(f"{controller!r} is not a reactive controller")

    def build_controller(self, name: str, connected_index: Optional[int] = None) -> Controller:
        """
        Instantiate one of racc, rccc, pacc, pccc.

        Connected controllers listen to vehicle ``connected_index``.
        """
        name = name.lower()
        if name not in CONTROLLER_NAMES:
            raise ConfigurationError(f"unknown controller {name!r}, expected one of {CONTROLLER_NAMES}")
        length = self.lab.vehicle.length
        try:
            if name == "racc":
                return RaccController(self.ovm_params("racc"), length)
            if name == "rccc":
                return RcccController(
                    self.ovm_params("rccc", connected_index), length, self.lab.simulation.dt
                )
            if name == "pacc":
                return PaccController(self.mpc_params())
            if connected_index is None:
                raise ConfigurationError("PCCC needs a connected vehicle index")
            return PcccController(
                self.mpc_params(), self.idm_params(), connected_index, self.estimator_params()
            )
        except DomainError as e:
            raise ConfigurationError(str(e)) from e

    def as_dict(self) -> Dict[str, Any]:
        return self.lab.model_dump()
