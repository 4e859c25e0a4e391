"""
Built-in experiment presets.

Each preset fixes a base scenario, a sweep axis and a list of series (one
curve each). The SNR axis is the total power P in dB over unit noise power.

* fig1: private sum rate vs SNR, |h1|/|h2| = 5, tau_sic = 1, kappa in {0, 1}
  for several lambda.
* fig2: common rate vs kappa at p1 = p2 = 1.7, |h1|/|h2| = 2, tau_sic = 2,
  one curve per (lambda, R_min) with the closed-form optimum starred.
* fig3: SAC sum rate vs SNR for proper and improper signaling, tau_sic = 1,
  R_min in {0.2, 0.5}.
* fig4: SAC-chosen kappa vs SNR per (lambda, R_min).
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping, Tuple

from .config import ExperimentConfig, SweepAxis
from ..utils.errors import ConfigError

FIG1_LAMBDAS = (0.1, 0.3, 0.5, 1.0)
FIG2_LAMBDAS = (0.3, 0.6, 1.0)
FIG2_PRIVATE_POWER = 1.7
# D = 16.6: user 2 binds in four of the six cells
FIG2_POWER_BUDGET = 20.0
SAC_LAMBDA = 0.3
FIG4_LAMBDAS = (0.1, 0.3, 0.5, 1.0)
R_MIN_CELLS = (0.2, 0.5)


@dataclass(frozen=True)
class Series:
    """One curve of an experiment."""

    label: str
    solver: str
    overrides: Mapping[str, float] = field(default_factory=dict)
    params: Mapping[str, float] = field(default_factory=dict)
    pgs: bool = False
    star: bool = False


@dataclass(frozen=True)
class Preset:
    name: str
    scenario: Mapping[str, float]
    sweep: SweepAxis
    series: Tuple[Series, ...]


def _snr_axis(start: float, stop: float, points: int) -> SweepAxis:
    return SweepAxis(variable="power_budget", start=start, stop=stop, points=points, scale="db")


def fig1() -> Preset:
    series = []
    for lam in FIG1_LAMBDAS:
        for kappa in (0, 1):
            series.append(
                Series(
                    label=f"lambda={lam:g},kappa={kappa}",
                    solver="private-max",
                    overrides={"lam": lam},
                    pgs=kappa == 0,
                )
            )
    return Preset(
        name="fig1",
        scenario={"gamma1": 25.0, "gamma2": 1.0, "tau_sic": 1.0, "r_min": 0.0, "noise_power": 1.0},
        sweep=_snr_axis(0.0, 30.0, 16),
        series=tuple(series),
    )


def fig2() -> Preset:
    series = []
    for lam in FIG2_LAMBDAS:
        for r_min in R_MIN_CELLS:
            series.append(
                Series(
                    label=f"lambda={lam:g},r_min={r_min:g}",
                    solver="common-curve",
                    overrides={"lam": lam, "r_min": r_min},
                    params={"p1": FIG2_PRIVATE_POWER, "p2": FIG2_PRIVATE_POWER},
                    star=True,
                )
            )
    return Preset(
        name="fig2",
        scenario={
            "gamma1": 4.0,
            "gamma2": 1.0,
            "tau_sic": 2.0,
            "power_budget": FIG2_POWER_BUDGET,
            "noise_power": 1.0,
        },
        sweep=SweepAxis(variable="kappa", start=0.0, stop=1.0, points=11),
        series=tuple(series),
    )


def fig3() -> Preset:
    series = []
    for r_min in R_MIN_CELLS:
        for pgs in (False, True):
            series.append(
                Series(
                    label=f"r_min={r_min:g},{'pgs' if pgs else 'igs'}",
                    solver="sum-rate-sac",
                    overrides={"r_min": r_min},
                    pgs=pgs,
                )
            )
    return Preset(
        name="fig3",
        scenario={"gamma1": 4.0, "gamma2": 1.0, "lam": SAC_LAMBDA, "tau_sic": 1.0, "noise_power": 1.0},
        sweep=_snr_axis(0.0, 30.0, 7),
        series=tuple(series),
    )


def fig4() -> Preset:
    series = tuple(
        Series(
            label=f"lambda={lam:g},r_min={r_min:g}",
            solver="sum-rate-sac",
            overrides={"lam": lam, "r_min": r_min},
        )
        for lam in FIG4_LAMBDAS
        for r_min in R_MIN_CELLS
    )
    return Preset(
        name="fig4",
        scenario={"gamma1": 4.0, "gamma2": 1.0, "tau_sic": 1.0, "noise_power": 1.0},
        sweep=_snr_axis(0.0, 30.0, 7),
        series=series,
    )


PRESETS = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4}


def custom(config: ExperimentConfig) -> Preset:
    """Single series built from the config's solver section."""
    if config.sweep is None:
        raise ConfigError("custom sweeps need a sweep axis", key="sweep")
    return Preset(
        name="custom",
        scenario=dict(config.scenario),
        sweep=config.sweep,
        series=(
            Series(
                label=config.solver.name,
                solver=config.solver.name,
                params=config.solver.fixed(),
                pgs=config.pgs,
            ),
        ),
    )


def resolve(config: ExperimentConfig) -> Preset:
    """
    Preset for ``config.experiment``.

    Config scenario fields override the preset's base scenario and a config
    sweep replaces the preset's axis.
    """
    if config.experiment == "custom":
        return custom(config)
    preset = PRESETS[config.experiment]()
    scenario: Dict[str, float] = dict(preset.scenario)
    scenario.update(config.scenario)
    return Preset(
        name=preset.name,
        scenario=scenario,
        sweep=config.sweep or preset.sweep,
        series=preset.series,
    )
