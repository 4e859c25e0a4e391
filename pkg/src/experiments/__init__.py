"""Experiment configs, figure presets and the sweep runner."""

from .config import ExperimentConfig, SolverSpec, SweepAxis, build_config, parse_config
from .presets import PRESETS, Preset, Series, resolve
from .runner import CSV_COLUMNS, SCHEMA_VERSION, SweepRunner, run, write_csv

__all__ = [
    "CSV_COLUMNS",
    "ExperimentConfig",
    "PRESETS",
    "Preset",
    "SCHEMA_VERSION",
    "Series",
    "SolverSpec",
    "SweepAxis",
    "SweepRunner",
    "build_config",
    "parse_config",
    "resolve",
    "run",
    "write_csv",
]
