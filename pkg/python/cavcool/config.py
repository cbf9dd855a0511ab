"""
Configuration management for cavcool

Loads configuration from YAML files and provides type-safe access.
Unknown keys are rejected, and validation errors report the line of the
offending key in the file.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from cavcool.amplitudes import DEFAULT_POLE_FLOOR
from cavcool.dynamics import DEFAULT_LEAK_BOUND
from cavcool.emission import EmissionPattern
from cavcool.errors import ConfigError
from cavcool.mcwf import DEFAULT_LEAK_BOUND as MCWF_LEAK_BOUND
from cavcool.models import SystemParams
from cavcool.scan import SCAN_OUTPUTS, Engine, ScanAxis, ScanSpec

logger = logging.getLogger(__name__)


class NumericsConfig(BaseModel):
    """Numerical tolerances and truncations"""

    model_config = ConfigDict(extra="forbid")

    pole_floor: float = Field(default=DEFAULT_POLE_FLOOR, gt=0, description="Smallest accepted |f(x)|")
    n_cavity: int = Field(default=6, ge=2, description="Cavity truncation of the liouvillian engine")
    auto_truncate: bool = Field(
        default=False, description="Grow n_cavity until the steady state converges"
    )
    leak_bound: float = Field(
        default=DEFAULT_LEAK_BOUND, gt=0, description="Top-level bound of the rate equation"
    )


class McwfConfig(BaseModel):
    """Monte Carlo wavefunction ensemble settings"""

    model_config = ConfigDict(extra="forbid")

    n_cavity: int = Field(default=4, ge=2, description="Cavity truncation")
    n_motion: int = Field(default=12, ge=2, description="Phonon truncation")
    n_trajectories: int = Field(default=500, ge=1, description="Ensemble size")
    t_max: float = Field(default=2000.0, gt=0, description="Final time in units of 1/ν")
    n_times: int = Field(default=101, ge=2, description="Output grid points")
    dt: Optional[float] = Field(default=None, gt=0, description="Integration step (auto if unset)")
    initial: Literal["fock", "thermal"] = Field(default="fock", description="Initial motional state")
    initial_n: float = Field(default=2, ge=0, description="Fock number or thermal mean")
    seed: int = Field(default=20260101, ge=0, description="Ensemble seed")
    leak_bound: float = Field(default=MCWF_LEAK_BOUND, gt=0, description="Top phonon level bound")

    def time_grid(self) -> List[float]:
        step = self.t_max / (self.n_times - 1)
        return [k * step for k in range(self.n_times)]


class ScanConfig(BaseModel):
    """Default scan definition"""

    model_config = ConfigDict(extra="forbid")

    axis1: ScanAxis = Field(
        default_factory=lambda: ScanAxis(name="delta_c", start=-2.0, stop=1.5, points=351)
    )
    axis2: Optional[ScanAxis] = None
    outputs: List[str] = Field(default_factory=lambda: list(SCAN_OUTPUTS))
    engine: Engine = Engine.ANALYTIC
    follow_optimum: bool = True


class OutputConfig(BaseModel):
    """Where results are written"""

    model_config = ConfigDict(extra="forbid")

    directory: Path = Field(default=Path("."), description="Output directory")
    prefix: str = Field(default="cavcool", description="File name prefix")
    gnuplot: bool = Field(default=False, description="Also write gnuplot matrices for scans")


class CavcoolConfig(BaseModel):
    """Main cavcool configuration"""

    model_config = ConfigDict(extra="forbid")

    system: SystemParams = Field(default_factory=SystemParams)
    emission: EmissionPattern = Field(default_factory=EmissionPattern)
    numerics: NumericsConfig = Field(default_factory=NumericsConfig)
    mcwf: McwfConfig = Field(default_factory=McwfConfig)
    scan: ScanConfig = Field(default_factory=ScanConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @classmethod
    def from_yaml(cls, path: Path) -> "CavcoolConfig":
        """Load configuration from YAML file"""
        with open(path) as f:
            text = f.read()
        return cls.from_text(text, source=str(path))

    @classmethod
    def from_text(cls, text: str, source: str = "<config>") -> "CavcoolConfig":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            raise ConfigError(f"{source}:{line or '?'}: invalid YAML: {e}", line=line) from e
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"{source}: top level must be a mapping", line=1)
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            first = e.errors()[0]
            line = locate_key(text, first["loc"])
            where = ".".join(str(part) for part in first["loc"])
            raise ConfigError(
                f"{source}:{line or '?'}: {where}: {first['msg']}", line=line
            ) from e

    @classmethod
    def from_default_locations(cls) -> "CavcoolConfig":
        """Load configuration from default locations"""
        default_paths = [
            Path("cavcool.yaml"),
            Path.home() / ".config" / "cavcool" / "cavcool.yaml",
        ]

        for path in default_paths:
            if path.exists():
                logger.debug(f"Using configuration {path}")
                return cls.from_yaml(path)

        return cls()

    def to_yaml(self) -> str:
        data = self.model_dump(mode="json", by_alias=True, exclude_none=True)
        return yaml.safe_dump(data, default_flow_style=False, sort_keys=False)

    def with_overrides(self, overrides: Dict[str, Any]) -> "CavcoolConfig":
        """
        Apply dotted-key overrides such as ``system.delta_c``.

        String values are parsed as YAML scalars so ``-1`` and ``pi/4`` work.

        Raises:
            ConfigError: For unknown keys or invalid values
        """
        data = self.model_dump(mode="json", by_alias=True)
        for key, value in overrides.items():
            if isinstance(value, str):
                value = yaml.safe_load(value) if value.strip() else value
            _set_dotted(data, key, value)
        try:
            return CavcoolConfig.model_validate(data)
        except ValidationError as e:
            first = e.errors()[0]
            where = ".".join(str(part) for part in first["loc"])
            raise ConfigError(f"override {where}: {first['msg']}") from e

    def scan_spec(self) -> ScanSpec:
        return ScanSpec(
            base=self.system,
            axis1=self.scan.axis1,
            axis2=self.scan.axis2,
            outputs=self.scan.outputs,
            engine=self.scan.engine,
            follow_optimum=self.scan.follow_optimum,
            emission=self.emission,
            n_cavity=self.numerics.n_cavity,
            pole_floor=self.numerics.pole_floor,
        )


_SECTIONS = {
    "system": SystemParams,
    "emission": EmissionPattern,
    "numerics": NumericsConfig,
    "mcwf": McwfConfig,
    "scan": ScanConfig,
    "output": OutputConfig,
}


def _external_name(model: type, key: str) -> str:
    info = model.model_fields.get(key)
    if info is not None and info.alias:
        return info.alias
    return key


def _set_dotted(data: dict, key: str, value: Any) -> None:
    parts = key.split(".")
    if len(parts) < 2 or parts[0] not in _SECTIONS:
        raise ConfigError(f"unknown config key '{key}' (use section.field)")
    target = data
    for part in parts[:-1]:
        if not isinstance(target.get(part), dict):
            if part in target and target[part] is not None:
                raise ConfigError(f"unknown config key '{key}'")
            target[part] = {}
        target = target[part]
    leaf = parts[-1]
    if len(parts) == 2:
        leaf = _external_name(_SECTIONS[parts[0]], leaf)
    target[leaf] = value


def locate_key(text: str, loc: Sequence[Any]) -> Optional[int]:
    """1-based line of the deepest YAML node matching a validation location"""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None
    line = None
    for part in loc:
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                if key_node.value == str(part):
                    line = key_node.start_mark.line + 1
                    node = value_node
                    break
            else:
                return line
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int):
            if part >= len(node.value):
                return line
            node = node.value[part]
            line = node.start_mark.line + 1
        else:
            return line
    return line
