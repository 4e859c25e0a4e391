"""
Experiment configuration.

Configs are small YAML files. Parsing is strict: every key must be known,
and errors name the dotted key path and, where available, the line it sits
on. Example::

    experiment: custom
    seed: 7
    output: results/custom.csv
    scenario:
      gamma1: 4.0
      gamma2: 1.0
      lam: 0.5
      power_budget: 10.0
      tau_sic: 1.0
      r_min: 0.5
    sweep:
      variable: power_budget
      start: 0
      stop: 30
      points: 16
      scale: db
    solver:
      name: private-max
"""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np
import yaml

from ..channel.models import Scenario
from ..oracle.grid_search import GridSpec
from ..sac.agent import SacConfig
from ..utils.errors import ConfigError, DomainError
from ..utils.logger import get_logger

logger = get_logger(__name__)

EXPERIMENTS = ("fig1", "fig2", "fig3", "fig4", "custom")
SOLVERS = ("eval", "private-max", "common-max", "common-curve", "sum-rate-sac", "oracle")
SCALES = ("linear", "db")

TOP_LEVEL_KEYS = (
    "experiment", "seed", "scenario", "sweep", "solver", "sac",
    "oracle", "output", "verify", "pgs", "workers",
)
SCENARIO_KEYS = ("gamma1", "gamma2", "h1", "h2", "noise_power", "lam", "power_budget", "tau_sic", "r_min")
SCENARIO_FIELDS = ("gamma1", "gamma2", "lam", "power_budget", "tau_sic", "r_min", "noise_power")
ALLOCATION_FIELDS = ("kappa", "p_c", "p1", "p2")
SWEEP_KEYS = ("variable", "start", "stop", "points", "scale")
SWEEP_VARIABLES = SCENARIO_FIELDS + ALLOCATION_FIELDS
SOLVER_KEYS = ("name",) + ALLOCATION_FIELDS
ORACLE_KEYS = ("n_kappa", "n_pc", "n_p1", "n_p2", "workers")

DEFAULT_NOISE_POWER = 1.0
DEFAULT_H2 = 1.0


@dataclass(frozen=True)
class SweepAxis:
    """One swept variable; ``db`` axes are given in dB and converted with 10^(x/10)."""

    variable: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError(f"unknown sweep variable '{self.variable}'", key="sweep.variable")
        if self.scale not in SCALES:
            raise ConfigError(f"sweep scale must be one of {SCALES}, got '{self.scale}'", key="sweep.scale")
        if self.points < 1:
            raise ConfigError(f"sweep needs at least one point, got {self.points}", key="sweep.points")
        if self.points > 1 and not self.stop > self.start:
            raise ConfigError(f"sweep stop ({self.stop}) must exceed start ({self.start})", key="sweep.stop")

    def nominal(self) -> np.ndarray:
        """Axis values as written in the config (dB for ``db`` axes)."""
        return np.linspace(self.start, self.stop, self.points)

    def values(self) -> np.ndarray:
        """Axis values in linear units."""
        nominal = self.nominal()
        return 10.0 ** (nominal / 10.0) if self.scale == "db" else nominal

    @property
    def label(self) -> str:
        return f"{self.variable}_db" if self.scale == "db" else self.variable


@dataclass(frozen=True)
class SolverSpec:
    """Solver selection plus the fixed allocation variables it needs."""

    name: str = "private-max"
    kappa: Optional[float] = None
    p_c: Optional[float] = None
    p1: Optional[float] = None
    p2: Optional[float] = None

    def __post_init__(self):
        if self.name not in SOLVERS:
            raise ConfigError(f"unknown solver '{self.name}', expected one of {SOLVERS}", key="solver.name")

    def fixed(self) -> Dict[str, float]:
        return {k: getattr(self, k) for k in ALLOCATION_FIELDS if getattr(self, k) is not None}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description."""

    experiment: str = "custom"
    seed: int = 0
    scenario: Mapping[str, float] = field(default_factory=dict)
    sweep: Optional[SweepAxis] = None
    solver: SolverSpec = field(default_factory=SolverSpec)
    sac: SacConfig = field(default_factory=SacConfig)
    grid: GridSpec = field(default_factory=GridSpec.default)
    oracle_workers: int = 1
    output: Optional[str] = None
    verify: bool = False
    pgs: bool = False
    workers: int = 1

    def output_path(self) -> Path:
        return Path(self.output) if self.output else Path("results") / f"{self.experiment}.csv"

    def with_overrides(self, **changes: Any) -> "ExperimentConfig":
        """Copy with CLI overrides applied; ``None`` values are ignored."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def scenario_at(self, overrides: Optional[Mapping[str, float]] = None) -> Scenario:
        """
        Build the scenario from the config fields plus ``overrides``.

        Raises:
            DomainError: the resulting scenario is invalid
        """
        fields_ = dict(self.scenario)
        fields_.update({k: v for k, v in (overrides or {}).items() if k in SCENARIO_FIELDS})
        missing = [k for k in ("gamma1", "gamma2", "lam", "power_budget", "tau_sic") if k not in fields_]
        if missing:
            raise DomainError(f"scenario is missing {missing}")
        return Scenario.create(
            gamma1=fields_["gamma1"],
            gamma2=fields_["gamma2"],
            lam=fields_["lam"],
            power_budget=fields_["power_budget"],
            tau_sic=fields_["tau_sic"],
            r_min=fields_.get("r_min", 0.0),
            noise_power=fields_.get("noise_power", DEFAULT_NOISE_POWER),
        )


def _key_lines(text: str) -> Dict[str, int]:
    """Map dotted key paths to their 1-based line numbers."""
    lines: Dict[str, int] = {}

    def walk(node: Any, prefix: str) -> None:
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                path = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
                lines[path] = key_node.start_mark.line + 1
                walk(value_node, path)

    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return lines
    walk(root, "")
    return lines


class _Reader:
    """Typed access to a parsed mapping with strict key checks."""

    def __init__(self, lines: Dict[str, int]):
        self.lines = lines

    def error(self, message: str, key: str) -> ConfigError:
        return ConfigError(message, key=key, line=self.lines.get(key))

    def section(self, data: Any, key: str, allowed: Tuple[str, ...]) -> Dict[str, Any]:
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise self.error(f"'{key}' must be a mapping", key)
        for name in data:
            path = f"{key}.{name}" if key else str(name)
            if name not in allowed:
                raise self.error(f"unknown key '{path}'", path)
        return data

    def number(self, data: Mapping[str, Any], name: str, prefix: str, default: Any = None, kind=float) -> Any:
        path = f"{prefix}.{name}" if prefix else name
        if name not in data:
            return default
        value = data[name]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.error(f"'{path}' must be a number, got {value!r}", path)
        if kind is int and float(value) != int(value):
            raise self.error(f"'{path}' must be an integer, got {value!r}", path)
        return kind(value)

    def flag(self, data: Mapping[str, Any], name: str, default: bool = False) -> bool:
        if name not in data:
            return default
        if not isinstance(data[name], bool):
            raise self.error(f"'{name}' must be true or false", name)
        return data[name]


def _scenario_fields(reader: _Reader, data: Dict[str, Any]) -> Dict[str, float]:
    raw = reader.section(data, "scenario", SCENARIO_KEYS)
    values = {k: reader.number(raw, k, "scenario") for k in SCENARIO_KEYS if k in raw}

    uses_gains = "h1" in values or "h2" in values
    if uses_gains and ("gamma1" in values or "gamma2" in values):
        raise reader.error("give either gamma1/gamma2 or h1/h2, not both", "scenario")

    noise = values.pop("noise_power", DEFAULT_NOISE_POWER)
    if not noise > 0:
        raise reader.error(f"noise_power must be > 0, got {noise}", "scenario.noise_power")
    if uses_gains:
        h1 = values.pop("h1", None)
        if h1 is None:
            raise reader.error("h1 is required when gains are given", "scenario.h1")
        h2 = values.pop("h2", DEFAULT_H2)
        values["gamma1"] = abs(h1) ** 2 / noise
        values["gamma2"] = abs(h2) ** 2 / noise
    elif "gamma2" not in values:
        values["gamma2"] = DEFAULT_H2 ** 2 / noise
    values["noise_power"] = noise
    return values


def _sweep(reader: _Reader, data: Any) -> Optional[SweepAxis]:
    if data is None:
        return None
    raw = reader.section(data, "sweep", SWEEP_KEYS)
    for name in ("variable", "start", "stop", "points"):
        if name not in raw:
            raise reader.error(f"sweep is missing required key 'sweep.{name}'", f"sweep.{name}")
    try:
        return SweepAxis(
            variable=str(raw["variable"]),
            start=reader.number(raw, "start", "sweep"),
            stop=reader.number(raw, "stop", "sweep"),
            points=reader.number(raw, "points", "sweep", kind=int),
            scale=str(raw.get("scale", "linear")).lower(),
        )
    except ConfigError as e:
        raise reader.error(e.message, e.key or "sweep") from e


def _solver(reader: _Reader, data: Any) -> SolverSpec:
    raw = reader.section(data, "solver", SOLVER_KEYS)
    try:
        return SolverSpec(
            name=str(raw.get("name", "private-max")),
            **{k: reader.number(raw, k, "solver") for k in ALLOCATION_FIELDS},
        )
    except ConfigError as e:
        raise reader.error(e.message, "solver.name") from e


def _sac(reader: _Reader, data: Any) -> SacConfig:
    allowed = tuple(SacConfig.__dataclass_fields__)
    raw = dict(reader.section(data, "sac", allowed))
    if "hidden_sizes" in raw:
        sizes = raw["hidden_sizes"]
        if not isinstance(sizes, list) or not all(isinstance(s, int) for s in sizes):
            raise reader.error("'sac.hidden_sizes' must be a list of integers", "sac.hidden_sizes")
        raw["hidden_sizes"] = tuple(sizes)
    try:
        return SacConfig(**raw)
    except (DomainError, TypeError) as e:
        raise reader.error(f"invalid SAC settings: {e}", "sac") from e


def _oracle(reader: _Reader, data: Any) -> Tuple[GridSpec, int]:
    raw = reader.section(data, "oracle", ORACLE_KEYS)
    defaults = GridSpec.default()
    counts = {
        name: reader.number(raw, name, "oracle", getattr(defaults, name), kind=int)
        for name in ("n_kappa", "n_pc", "n_p1", "n_p2")
    }
    workers = reader.number(raw, "workers", "oracle", 1, kind=int)
    try:
        return GridSpec(**counts), max(workers, 1)
    except DomainError as e:
        raise reader.error(str(e), "oracle") from e


def build_config(data: Any, lines: Optional[Dict[str, int]] = None) -> ExperimentConfig:
    """
    Validate a parsed config mapping.

    Args:
        data: Result of ``yaml.safe_load``
        lines: Dotted key to line number map for diagnostics

    Returns:
        ExperimentConfig with defaults filled in

    Raises:
        ConfigError: unknown key, wrong type or invalid value
    """
    reader = _Reader(lines or {})
    data = reader.section(data if data is not None else {}, "", TOP_LEVEL_KEYS)

    experiment = str(data.get("experiment", "custom"))
    if experiment not in EXPERIMENTS:
        raise reader.error(f"unknown experiment '{experiment}', expected one of {EXPERIMENTS}", "experiment")

    output = data.get("output")
    if output is not None and not isinstance(output, str):
        raise reader.error("'output' must be a path string", "output")

    grid, oracle_workers = _oracle(reader, data.get("oracle"))
    seed = reader.number(data, "seed", "", 0, kind=int)
    if seed < 0:
        raise reader.error(f"seed must be >= 0, got {seed}", "seed")

    config = ExperimentConfig(
        experiment=experiment,
        seed=seed,
        scenario=_scenario_fields(reader, data.get("scenario")),
        sweep=_sweep(reader, data.get("sweep")),
        solver=_solver(reader, data.get("solver")),
        sac=_sac(reader, data.get("sac")),
        grid=grid,
        oracle_workers=oracle_workers,
        output=output,
        verify=reader.flag(data, "verify"),
        pgs=reader.flag(data, "pgs"),
        workers=max(reader.number(data, "workers", "", 1, kind=int), 1),
    )

    if experiment == "custom" and config.sweep is not None:
        variable = config.sweep.variable
        if variable in ALLOCATION_FIELDS and config.solver.name not in ("eval", "common-max", "common-curve"):
            raise reader.error(
                f"solver '{config.solver.name}' chooses {variable} itself; it cannot be swept",
                "sweep.variable",
            )
    return config


def parse_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Read and validate an experiment config file.

    Raises:
        ConfigError: missing file, YAML syntax error or invalid content
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e

    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"invalid YAML in {path}: {getattr(e, 'problem', e)}", line=line) from e

    config = build_config(data, _key_lines(text))
    logger.debug(f"loaded config {path}: experiment={config.experiment}, solver={config.solver.name}")
    return config
