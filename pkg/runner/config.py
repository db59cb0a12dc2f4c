"""
Configuration module for polyfix experiments.
"""

import json
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List

import yaml
from dotenv import load_dotenv

from maps.base import MapSpec
from maps.loader import map_from_dict
from numerics.errors import ConfigError
from polynorm.norms import PolyhedralNorm, norm_from_dict

load_dotenv(override=True)

SCHEMA_VERSION = "1"
COMMANDS = ("certify", "fix", "orbit", "structure")
TRUTHY = ("true", "1", "yes")


def _env_value(key: str, cast):
    value = os.environ[key]
    try:
        return cast(value)
    except ValueError:
        raise ConfigError(f"{key}={value!r} is not a valid {cast.__name__}")


@dataclass
class Tolerances:
    fp_tol: float = 1e-10
    orbit_tol: float = 1e-8
    face_tol: float = 1e-9
    check_tol: float = 1e-7


@dataclass
class Caps:
    max_iter: int = 20000
    p_max: int = 4096
    retry_budget: int = 16


@dataclass
class ExperimentConfig:
    """Configuration class for one polyfix experiment."""

    name: str = "experiment"
    schema_version: str = SCHEMA_VERSION

    # What is being studied
    norm: Dict[str, Any] = field(default_factory=dict)
    map: Dict[str, Any] = field(default_factory=dict)

    # Sampling
    starts: int = 16
    seed: int = 0
    box: float = 4.0
    samples: int = 200
    trials: int = 2000

    tolerances: Tolerances = field(default_factory=Tolerances)
    caps: Caps = field(default_factory=Caps)

    # Processing control
    commands: List[str] = field(default_factory=lambda: ["certify", "orbit"])
    oracle: bool = False
    linearize: bool = False
    threads: int = 1

    # Output directories
    logs_dir: str = "logs"

    def __post_init__(self):
        if isinstance(self.tolerances, dict):
            self.tolerances = _nested(Tolerances, self.tolerances, "tolerances")
        if isinstance(self.caps, dict):
            self.caps = _nested(Caps, self.caps, "caps")
        self.schema_version = str(self.schema_version)

    def apply_environment(self) -> "ExperimentConfig":
        """Override fields from POLYFIX_* environment variables."""
        if "POLYFIX_SEED" in os.environ:
            self.seed = _env_value("POLYFIX_SEED", int)

        if "POLYFIX_STARTS" in os.environ:
            self.starts = _env_value("POLYFIX_STARTS", int)

        if "POLYFIX_THREADS" in os.environ:
            self.threads = _env_value("POLYFIX_THREADS", int)

        # Tolerances
        for name in ("fp_tol", "orbit_tol", "face_tol", "check_tol"):
            key = f"POLYFIX_{name.upper()}"
            if key in os.environ:
                setattr(self.tolerances, name, _env_value(key, float))

        # Caps
        for name in ("max_iter", "p_max", "retry_budget"):
            key = f"POLYFIX_{name.upper()}"
            if key in os.environ:
                setattr(self.caps, name, _env_value(key, int))

        if "POLYFIX_ORACLE" in os.environ:
            self.oracle = os.environ["POLYFIX_ORACLE"].lower() in TRUTHY

        if "POLYFIX_LINEARIZE" in os.environ:
            self.linearize = os.environ["POLYFIX_LINEARIZE"].lower() in TRUTHY

        # Directory settings
        if "POLYFIX_LOGS_DIR" in os.environ:
            self.logs_dir = os.environ["POLYFIX_LOGS_DIR"]

        return self

    @classmethod
    def from_environment(cls) -> "ExperimentConfig":
        """Load configuration from environment variables."""
        return cls().apply_environment()

    @classmethod
    def from_yaml(cls, yaml_file: str) -> "ExperimentConfig":
        """Load configuration from a YAML (or JSON) file."""
        if not os.path.exists(yaml_file):
            raise FileNotFoundError(f"Config file not found: {yaml_file}")

        with open(yaml_file, "r") as f:
            try:
                config_data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise ConfigError(f"{yaml_file} is not valid YAML: {e}")

        if not isinstance(config_data, dict):
            raise ConfigError(f"{yaml_file} must contain a mapping")
        if "schema_version" not in config_data:
            raise ConfigError(f"{yaml_file} has no schema_version")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(config_data) - known)
        if unknown:
            raise ConfigError(f"{yaml_file} has unknown fields: {unknown}")
        try:
            config = cls(**config_data)
            config.validate()
        except ConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{yaml_file}: {e}")
        return config

    def validate(self) -> None:
        """Enforce positivity of tolerances, starts and caps, and a buildable norm and map."""
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version!r}")
        for name, value in asdict(self.tolerances).items():
            if not value > 0:
                raise ConfigError(f"tolerance {name} must be positive, got {value}")
        for name, value in asdict(self.caps).items():
            if int(value) < 1:
                raise ConfigError(f"cap {name} must be at least 1, got {value}")
        if self.starts < 1:
            raise ConfigError(f"starts must be at least 1, got {self.starts}")
        if self.samples < 1 or self.trials < 1:
            raise ConfigError("samples and trials must be at least 1")
        if self.threads < 1:
            raise ConfigError(f"threads must be at least 1, got {self.threads}")
        unknown = [c for c in self.commands if c not in COMMANDS]
        if unknown:
            raise ConfigError(f"unknown commands {unknown}; expected a subset of {COMMANDS}")
        self.build_map(self.build_norm())

    def build_norm(self) -> PolyhedralNorm:
        if not self.norm:
            raise ConfigError("config has no norm")
        return norm_from_dict(self.norm)

    def build_map(self, norm: PolyhedralNorm) -> MapSpec:
        if not self.map:
            raise ConfigError("config has no map")
        return map_from_dict(self.map, norm.ambient_dim)

    def to_dict(self) -> dict:
        return json.loads(json.dumps(asdict(self)))


def _nested(cls, values: dict, label: str):
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown {label} fields: {unknown}")
    return cls(**{k: type(getattr(cls(), k))(v) for k, v in values.items()})
