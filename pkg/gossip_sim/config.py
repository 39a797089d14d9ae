"""
Configuration management for the gossip simulator
"""

import os
from typing import Any, Dict

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator
from rich.console import Console

from .errors import InvalidConfig

console = Console()


class ProtocolsConfig(BaseModel):
    """Constants of the GOSSIP protocols"""
    c_tau: float = 2.0
    superstep_slack: int = 8
    rumor_slack: int = 4
    c_in: float = 4.0
    c_dx: float = 128.0
    c_rounds: float = 16.0
    c_msg: float = 64.0

    @field_validator("c_tau", "c_in", "c_dx", "c_rounds", "c_msg")
    @classmethod
    def _positive(cls, value: float) -> float:
        if value <= 0:
            raise ValueError("must be positive")
        return value

    @field_validator("superstep_slack", "rumor_slack")
    @classmethod
    def _non_negative(cls, value: int) -> int:
        if value < 0:
            raise ValueError("must be non-negative")
        return value


class DecomposeConfig(BaseModel):
    """Exactness limits of the conductance oracle"""
    exact_limit: int = 20
    tolerance: float = 1e-12
    power_iterations: int = 200
    power_tolerance: float = 1e-9

    @field_validator("exact_limit", "power_iterations")
    @classmethod
    def _at_least_one(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be at least 1")
        return value


class SimulateConfig(BaseModel):
    """LOCAL executor settings"""
    local_round_cap: int = 10_000
    epsilon: float = 0.5

    @field_validator("local_round_cap")
    @classmethod
    def _cap_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be at least 1")
        return value

    @field_validator("epsilon")
    @classmethod
    def _eps_positive(cls, value: float) -> float:
        if value <= 0:
            raise ValueError("must be positive")
        return value


class LoggingConfig(BaseModel):
    """Logging configuration"""
    level: str = "INFO"


class SimulatorConfig(BaseModel):
    """Main configuration class"""
    protocols: ProtocolsConfig = Field(default_factory=ProtocolsConfig)
    decompose: DecomposeConfig = Field(default_factory=DecomposeConfig)
    simulate: SimulateConfig = Field(default_factory=SimulateConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SimulatorConfig":
        """Build a config, turning pydantic errors into InvalidConfig"""
        try:
            return cls(**(data or {}))
        except ValidationError as e:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
            )
            raise InvalidConfig(problems) from e

    @classmethod
    def load_from_env(cls) -> "SimulatorConfig":
        """Load configuration from environment variables"""
        config = cls()

        if c_tau := os.getenv("GOSSIP_SIM_C_TAU"):
            config = config.with_overrides({"protocols": {"c_tau": float(c_tau)}})
        if exact_limit := os.getenv("GOSSIP_SIM_EXACT_LIMIT"):
            config = config.with_overrides({"decompose": {"exact_limit": int(exact_limit)}})
        if level := os.getenv("GOSSIP_SIM_LOG_LEVEL"):
            config.logging.level = level

        return config

    @classmethod
    def load_from_file(cls, config_path: str) -> "SimulatorConfig":
        """Load configuration from YAML file"""
        try:
            with open(config_path, 'r') as f:
                data = yaml.safe_load(f)
        except FileNotFoundError:
            console.print(f"[yellow]Config file {config_path} not found, using defaults[/yellow]")
            return cls()
        except yaml.YAMLError as e:
            raise InvalidConfig(f"{config_path}: {e}") from e
        return cls.from_dict(data)

    def with_overrides(self, overrides: Dict[str, Dict[str, Any]]) -> "SimulatorConfig":
        """Return a validated copy with section-wise overrides applied"""
        data = self.model_dump()
        for section, values in overrides.items():
            data.setdefault(section, {}).update(values)
        return SimulatorConfig.from_dict(data)

    def save_to_file(self, config_path: str) -> None:
        """Save configuration to YAML file"""
        with open(config_path, 'w') as f:
            yaml.dump(self.model_dump(), f, default_flow_style=False)
