"""Run configuration loading and validation."""

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import yaml

from ..analysis.estimate import INNOVATION_LAWS
from ..errors import ConfigError

FREQUENCIES = ("monthly", "daily")
MODES = ("discrete", "continuous")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
COMMANDS_NEEDING_SEED = ("simulate", "returns")
MAX_STEPS = 1e9


@dataclass
class DataConfig:
    rates: str = ""
    vix: str = ""
    rates_frequency: str = "monthly"
    vix_frequency: str = "monthly"
    layout: Dict[str, Any] = field(default_factory=dict)


@dataclass
class ModelConfig:
    d: int = 3
    vix_scaled: List[int] = field(default_factory=list)
    diagonal_b: bool = False
    diagonal_sigma: bool = False
    vol_feedback: bool = True


@dataclass
class SimulationConfig:
    mode: str = "discrete"
    steps: int = 1_000_000
    horizon: Optional[float] = None  # months; overrides steps in continuous mode
    h: float = 1.0 / 12.0
    reps: int = 8
    seed: Optional[int] = None
    innovation: str = "gaussian"
    innovation_df: float = 0.0
    allow_unstable: bool = False
    export_rows: int = 10_000


@dataclass
class ReturnsConfig:
    maturities: List[int] = field(default_factory=lambda: [120])
    benchmark: int = 120
    short: int = 1


@dataclass
class DiagnoseConfig:
    component: Optional[int] = None  # 1-based; None means all
    max_lag: int = 24
    ljung_box_lags: int = 10


@dataclass
class OutputConfig:
    dir: str = "outputs"
    model: str = ""  # defaults to <dir>/model.json


@dataclass
class RunConfig:
    data: DataConfig = field(default_factory=DataConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    returns: ReturnsConfig = field(default_factory=ReturnsConfig)
    diagnose: DiagnoseConfig = field(default_factory=DiagnoseConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    log_level: str = "INFO"
    threads: Optional[int] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """Construct config from a plain dict (no YAML file needed)."""
        return _build_config_from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @property
    def model_path(self) -> str:
        return self.output.model or os.path.join(self.output.dir, "model.json")

    def data_hash(self) -> str:
        """Short hash of the data section, recorded in model files."""
        payload = json.dumps(asdict(self.data), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def validate(self, command: Optional[str] = None) -> "RunConfig":
        """Check cross-field constraints for ``command``.

        Raises:
            ConfigError: On the first violated constraint.
        """
        if self.data.rates_frequency not in FREQUENCIES:
            raise ConfigError(f"data.rates_frequency must be one of {FREQUENCIES}")
        if self.data.vix_frequency not in FREQUENCIES:
            raise ConfigError(f"data.vix_frequency must be one of {FREQUENCIES}")
        if self.model.d < 1:
            raise ConfigError(f"model.d must be at least 1, got {self.model.d}")
        bad = [i for i in self.model.vix_scaled if not 1 <= i <= self.model.d]
        if bad:
            raise ConfigError(f"model.vix_scaled entries {bad} outside 1..{self.model.d}")
        sim = self.simulation
        if sim.mode not in MODES:
            raise ConfigError(f"simulation.mode must be one of {MODES}, got {sim.mode!r}")
        if sim.reps < 1:
            raise ConfigError(f"simulation.reps must be at least 1, got {sim.reps}")
        if sim.steps < 1:
            raise ConfigError(f"simulation.steps must be at least 1, got {sim.steps}")
        if not sim.h > 0.0:
            raise ConfigError(f"simulation.h must be positive, got {sim.h}")
        if sim.horizon is not None and not sim.horizon > 0.0:
            raise ConfigError(f"simulation.horizon must be positive, got {sim.horizon}")
        if sim.horizon is not None and sim.horizon / sim.h > MAX_STEPS:
            raise ConfigError(f"simulation.horizon / h exceeds {MAX_STEPS:.0e} steps")
        if sim.innovation not in INNOVATION_LAWS:
            raise ConfigError(f"simulation.innovation must be one of {INNOVATION_LAWS}")
        if sim.innovation == "student_t" and sim.innovation_df <= 2.0:
            raise ConfigError("student_t innovations need simulation.innovation_df > 2")
        if sim.seed is not None and sim.seed < 0:
            raise ConfigError("simulation.seed must be non-negative")
        if command in COMMANDS_NEEDING_SEED and sim.seed is None:
            raise ConfigError(f"{command} needs an explicit seed (--seed or simulation.seed)")
        if any(l < 1 for l in self.returns.maturities) or not self.returns.maturities:
            raise ConfigError("returns.maturities must be positive month counts")
        if self.returns.benchmark < 1 or self.returns.short < 1:
            raise ConfigError("returns.benchmark and returns.short must be positive")
        if self.diagnose.component is not None and self.diagnose.component < 1:
            raise ConfigError("diagnose.component is 1-based")
        if self.log_level.upper() not in LOG_LEVELS:
            raise ConfigError(f"log_level must be one of {LOG_LEVELS}")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be at least 1")
        return self


def _section(data: Dict[str, Any], name: str) -> Dict[str, Any]:
    section = data.get(name, {})
    if section is None:
        return {}
    if not isinstance(section, dict):
        raise ConfigError(f"config section {name!r} must be a mapping")
    return section


def _known(section: Dict[str, Any], cls: type, name: str) -> Dict[str, Any]:
    unknown = sorted(set(section) - set(cls.__dataclass_fields__))
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {', '.join(unknown)}")
    return section


def _int_list(value: Any, name: str) -> List[int]:
    if value is None:
        return []
    if isinstance(value, int):
        value = [value]
    elif isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    try:
        return [int(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a list of integers, got {value!r}") from None


def _build_config_from_dict(data: Optional[Dict[str, Any]]) -> RunConfig:
    """Internal: build RunConfig from a dict.

    Shared implementation used by both ``load_config`` and
    ``RunConfig.from_dict``.
    """
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    allowed = {"data", "model", "simulation", "returns", "diagnose", "output", "log_level", "threads"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    model_section = dict(_known(_section(data, "model"), ModelConfig, "model"))
    if "vix_scaled" in model_section:
        model_section["vix_scaled"] = _int_list(model_section["vix_scaled"], "model.vix_scaled")
    returns_section = dict(_known(_section(data, "returns"), ReturnsConfig, "returns"))
    if "maturities" in returns_section:
        returns_section["maturities"] = _int_list(
            returns_section["maturities"], "returns.maturities"
        )

    threads = data.get("threads")
    try:
        return RunConfig(
            data=DataConfig(**_known(_section(data, "data"), DataConfig, "data")),
            model=ModelConfig(**model_section),
            simulation=SimulationConfig(
                **_known(_section(data, "simulation"), SimulationConfig, "simulation")
            ),
            returns=ReturnsConfig(**returns_section),
            diagnose=DiagnoseConfig(**_known(_section(data, "diagnose"), DiagnoseConfig, "diagnose")),
            output=OutputConfig(**_known(_section(data, "output"), OutputConfig, "output")),
            log_level=str(data.get("log_level", "INFO")).upper(),
            threads=int(threads) if threads is not None else None,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc


def merge_overrides(data: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively overlay ``overrides`` on ``data``; ``None`` leaves a key alone."""
    merged = dict(data)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict):
            base = merged.get(key) or {}
            if not isinstance(base, dict):
                raise ConfigError(f"config section {key!r} must be a mapping")
            merged[key] = merge_overrides(base, value)
        else:
            merged[key] = value
    return merged


def read_config_file(config_path: str) -> Dict[str, Any]:
    """Raw mapping from a YAML config file.

    Raises:
        FileNotFoundError: If the file does not exist.
        ConfigError: If the file is not valid YAML or not a mapping.
    """
    with open(config_path) as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{config_path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{config_path}: config root must be a mapping")
    return data


def load_config(config_path: str) -> RunConfig:
    """Load configuration from YAML file."""
    return _build_config_from_dict(read_config_file(config_path))
