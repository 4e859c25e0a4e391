"""
Sweep execution and CSV output.

A sweep expands into independent tasks (one per series and sweep value,
plus one starred closed-form row per series where the preset asks for it).
Tasks may run on a thread pool; rows are always written in task order.
"""

import math
import re
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from .config import ALLOCATION_FIELDS, ExperimentConfig
from .presets import Preset, Series, resolve
from ..channel.models import Allocation, RateReport, Scenario
from ..channel.rate_engine import full_report
from ..oracle.grid_search import GridSpec, grid_common, grid_private, grid_sum_rate, resolution_bound
from ..sac.agent import SacAgent
from ..sac.environment import ScenarioSampler
from ..sac.trainer import TrainingLog, evaluate_policy, train
from ..solvers.common_max import CommonMaxSolver, common_rate_curve
from ..solvers.private_max import PrivateMaxSolver
from ..utils.errors import ConfigError, DomainError, InfeasibleError
from ..utils.logger import get_logger

logger = get_logger(__name__)

SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "schema_version", "experiment", "solver", "series", "sweep_variable", "sweep_value",
    "lambda", "r_min", "kappa", "p_c", "p1", "p2", "r1", "r2", "rc1", "rc2", "rc", "r_tot",
    "feasible", "branch", "oracle_value", "starred",
)
FEASIBILITY_SLACK = 1e-9
ORACLE_MARGIN = 1e-6
STATE_DIM = 6


@dataclass(frozen=True)
class SweepTask:
    """One row (or starred row) to compute."""

    index: int
    series: Series
    sweep_variable: str
    sweep_value: float
    scenario_fields: Mapping[str, float]
    params: Mapping[str, float] = field(default_factory=dict)
    pgs: bool = False
    seed: int = 0
    starred: bool = False


class Outcome(NamedTuple):
    solver: str
    alloc: Optional[Allocation]
    report: Optional[RateReport]
    branch: str = ""
    value: float = float("nan")
    oracle: float = float("nan")


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "_", label).strip("_")


def is_feasible(scenario: Scenario, alloc: Allocation, report: RateReport) -> bool:
    """Whether ``alloc`` meets the SIC floor, the budget and both minimum rates."""
    kappa = alloc.kappa.kappa
    return (
        alloc.p_c >= scenario.tau_sic - FEASIBILITY_SLACK
        and alloc.total_power <= scenario.power_budget * (1.0 + FEASIBILITY_SLACK)
        and 0.0 <= kappa <= 1.0
        and report.r1 >= scenario.r_min - FEASIBILITY_SLACK
        and report.r2 >= scenario.r_min - FEASIBILITY_SLACK
    )


class SweepRunner:
    """Expand an experiment config into tasks, evaluate them and collect rows."""

    def __init__(
        self,
        config: ExperimentConfig,
        checkpoint_dir: Optional[Union[str, Path]] = None,
        progress: bool = True,
    ):
        """
        Initialize runner.

        Args:
            config: Validated experiment config
            checkpoint_dir: Directory for SAC checkpoints (none written if omitted)
            progress: Show a tqdm progress bar over tasks
        """
        self.config = config
        self.checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir else None
        self.progress = progress
        self.training_logs: Dict[int, TrainingLog] = {}

    # ------------------------------------------------------------------
    # task expansion

    def tasks(self, preset: Optional[Preset] = None) -> List[SweepTask]:
        """All tasks of the sweep, in output order."""
        preset = preset or resolve(self.config)
        axis = preset.sweep
        tasks: List[SweepTask] = []

        for series in preset.series:
            base_fields = dict(preset.scenario)
            base_fields.update(series.overrides)
            pgs = series.pgs or self.config.pgs

            for nominal, value in zip(axis.nominal(), axis.values()):
                fields_ = dict(base_fields)
                params = dict(series.params)
                if axis.variable in ALLOCATION_FIELDS:
                    params[axis.variable] = float(value)
                else:
                    fields_[axis.variable] = float(value)
                tasks.append(
                    SweepTask(
                        index=len(tasks),
                        series=series,
                        sweep_variable=axis.label,
                        sweep_value=float(nominal),
                        scenario_fields=fields_,
                        params=params,
                        pgs=pgs,
                        seed=self.config.seed + len(tasks),
                    )
                )

            if series.star:
                tasks.append(
                    SweepTask(
                        index=len(tasks),
                        series=series,
                        sweep_variable=axis.label,
                        sweep_value=float("nan"),
                        scenario_fields=base_fields,
                        params=dict(series.params),
                        pgs=pgs,
                        seed=self.config.seed + len(tasks),
                        starred=True,
                    )
                )
        return tasks

    def point_task(self, solver: str) -> SweepTask:
        """Single task for a one-off solver run on the config's scenario."""
        series = Series(label=solver, solver=solver, params=self.config.solver.fixed(), pgs=self.config.pgs)
        return SweepTask(
            index=0,
            series=series,
            sweep_variable="",
            sweep_value=float("nan"),
            scenario_fields=dict(self.config.scenario),
            params=series.params,
            pgs=self.config.pgs,
            seed=self.config.seed,
        )

    # ------------------------------------------------------------------
    # execution

    def run(self) -> pd.DataFrame:
        """Evaluate every sweep task; rows come back in task order."""
        tasks = self.tasks()
        logger.info(f"Running {len(tasks)} tasks for experiment '{self.config.experiment}'")
        rows: List[Optional[Dict[str, Any]]] = [None] * len(tasks)

        with ThreadPoolExecutor(max_workers=self.config.workers) as executor:
            futures = {executor.submit(self.evaluate, task, False): task for task in tasks}
            completed = tqdm(
                as_completed(futures),
                total=len(futures),
                desc="Sweep",
                unit="pt",
                disable=not self.progress,
            )
            for future in completed:
                task = futures[future]
                rows[task.index] = future.result()

        return pd.DataFrame(rows, columns=list(CSV_COLUMNS))

    def run_point(self, solver: str) -> pd.DataFrame:
        """
        One solver on the config's scenario, or along its sweep when one is given.

        Errors are not turned into infeasible rows here: an invalid scenario
        raises ConfigError and an infeasible one raises InfeasibleError.
        """
        if self.config.sweep is not None:
            series = Series(label=solver, solver=solver, params=self.config.solver.fixed(), pgs=self.config.pgs)
            preset = Preset(
                name=self.config.experiment,
                scenario=dict(self.config.scenario),
                sweep=self.config.sweep,
                series=(series,),
            )
            rows = [self.evaluate(task, True) for task in self.tasks(preset)]
        else:
            rows = [self.evaluate(self.point_task(solver), True)]
        return pd.DataFrame(rows, columns=list(CSV_COLUMNS))

    def evaluate(self, task: SweepTask, strict: bool = False) -> Dict[str, Any]:
        """
        Compute one row.

        Args:
            task: Task to evaluate
            strict: Raise on invalid or infeasible scenarios instead of emitting an infeasible row
        """
        try:
            scenario = self._scenario(task)
        except DomainError as e:
            if strict:
                raise ConfigError(str(e), key="scenario") from e
            logger.warning(f"[{task.series.label}] invalid sweep point {task.sweep_value:g}: {e}")
            return self._row(task, task.series.solver, None, None, None, branch="invalid")

        try:
            outcome = self._solve(task, scenario)
        except InfeasibleError as e:
            if strict:
                raise
            logger.warning(f"[{task.series.label}] infeasible sweep point {task.sweep_value:g}: {e}")
            return self._row(task, task.series.solver, scenario, None, None, branch="infeasible")
        except DomainError as e:
            if strict:
                raise ConfigError(str(e), key="solver") from e
            logger.warning(f"[{task.series.label}] invalid sweep point {task.sweep_value:g}: {e}")
            return self._row(task, task.series.solver, scenario, None, None, branch="invalid")

        if strict and outcome.alloc is None:
            raise InfeasibleError(f"{outcome.solver} found no feasible allocation ({outcome.branch})")

        if self.config.verify and outcome.alloc is not None:
            self._check_oracle(task, scenario, outcome)

        sweep_value = task.sweep_value
        if task.starred and outcome.alloc is not None:
            sweep_value = outcome.alloc.kappa.kappa
        return self._row(
            replace(task, sweep_value=sweep_value),
            outcome.solver,
            scenario,
            outcome.alloc,
            outcome.report,
            branch=outcome.branch,
            oracle=outcome.oracle,
        )

    def _scenario(self, task: SweepTask) -> Scenario:
        probe = replace(self.config, scenario=dict(task.scenario_fields))
        return probe.scenario_at()

    # ------------------------------------------------------------------
    # solvers

    def _solve(self, task: SweepTask, scenario: Scenario) -> Outcome:
        solver = "common-max" if task.starred else task.series.solver
        handlers = {
            "eval": self._eval,
            "private-max": self._private_max,
            "common-max": self._common_max,
            "common-curve": self._common_curve,
            "sum-rate-sac": self._sum_rate_sac,
            "oracle": self._oracle,
        }
        return handlers[solver](task, scenario)

    @staticmethod
    def _require(task: SweepTask, *names: str) -> List[float]:
        missing = [n for n in names if n not in task.params]
        if missing:
            raise ConfigError(f"solver '{task.series.solver}' needs {missing}", key="solver")
        return [float(task.params[n]) for n in names]

    def _eval(self, task: SweepTask, scenario: Scenario) -> Outcome:
        kappa, p_c, p1, p2 = self._require(task, *ALLOCATION_FIELDS)
        alloc = scenario.to_internal_labels(Allocation(p_c=p_c, p1=p1, p2=p2, kappa=kappa))
        report = full_report(scenario, alloc)
        return Outcome("eval", alloc, report, value=report.r_tot)

    def _private_max(self, task: SweepTask, scenario: Scenario) -> Outcome:
        solution = PrivateMaxSolver(pgs=task.pgs).solve(scenario)
        report = full_report(scenario, solution.alloc)
        oracle = float("nan")
        if self.config.verify and not task.pgs:
            oracle = grid_private(scenario, self.config.grid, self.config.oracle_workers).best_value
        return Outcome(
            "private-max", solution.alloc, report, solution.boundary or "interior", solution.objective, oracle
        )

    def _common_max(self, task: SweepTask, scenario: Scenario) -> Outcome:
        p1, p2 = self._require(task, "p1", "p2")
        if scenario.swapped:
            p1, p2 = p2, p1
        solution = CommonMaxSolver(pgs=task.pgs).solve(scenario, p1, p2)
        if not solution.feasible:
            return Outcome("common-max", None, None, solution.branch.value)
        oracle = float("nan")
        if self.config.verify and not task.pgs:
            oracle = grid_common(scenario, p1, p2, GridSpec.verify()).best_rc
        return Outcome(
            "common-max", solution.allocation, solution.report, solution.branch.value, solution.rc, oracle
        )

    def _common_curve(self, task: SweepTask, scenario: Scenario) -> Outcome:
        kappa, p1, p2 = self._require(task, "kappa", "p1", "p2")
        if scenario.swapped:
            p1, p2 = p2, p1
        rates, powers = common_rate_curve(scenario, p1, p2, [kappa])
        if not np.isfinite(rates[0]):
            return Outcome("common-curve", None, None, "infeasible")
        alloc = Allocation(p_c=float(powers[0]), p1=p1, p2=p2, kappa=kappa)
        return Outcome("common-curve", alloc, full_report(scenario, alloc), value=float(rates[0]))

    def _sum_rate_sac(self, task: SweepTask, scenario: Scenario) -> Outcome:
        sac_config = replace(self.config.sac, seed=task.seed, pgs=task.pgs)
        agent = SacAgent(STATE_DIM, sac_config, np.random.default_rng(task.seed))
        sampler = ScenarioSampler.fixed(scenario)
        policy, log = train(sampler, sac_config, agent=agent)
        self.training_logs[task.index] = log

        if self.checkpoint_dir is not None:
            path = self.checkpoint_dir / f"{_slug(task.series.label)}_{task.index:04d}.joblib"
            agent.save(path, sampler.scaler().to_dict())

        alloc, report = evaluate_policy(policy, scenario)
        oracle = float("nan")
        if self.config.verify:
            oracle = grid_sum_rate(scenario, self.config.grid, self.config.oracle_workers).best_value
        return Outcome("sum-rate-sac", alloc, report, value=report.r_tot, oracle=oracle)

    def _oracle(self, task: SweepTask, scenario: Scenario) -> Outcome:
        result = grid_sum_rate(scenario, self.config.grid, self.config.oracle_workers)
        report = full_report(scenario, result.best_alloc)
        return Outcome("oracle", result.best_alloc, report, value=result.best_value, oracle=result.best_value)

    def _check_oracle(self, task: SweepTask, scenario: Scenario, outcome: Outcome) -> None:
        """Warn when a closed-form result and the grid oracle disagree beyond grid resolution."""
        objectives = {"private-max": "private", "common-max": "common"}
        objective = objectives.get(outcome.solver)
        if objective is None or not math.isfinite(outcome.oracle):
            return
        grid = GridSpec.verify() if objective == "common" else self.config.grid
        bound = resolution_bound(scenario, grid, outcome.alloc, objective=objective)
        gap = outcome.value - outcome.oracle
        if gap < -ORACLE_MARGIN or gap > bound:
            logger.warning(
                f"[{task.series.label}] {outcome.solver}={outcome.value:.9g} vs oracle={outcome.oracle:.9g} "
                f"(resolution bound {bound:.3g})"
            )

    # ------------------------------------------------------------------
    # rows

    def _row(
        self,
        task: SweepTask,
        solver: str,
        scenario: Optional[Scenario],
        alloc: Optional[Allocation],
        report: Optional[RateReport],
        branch: str = "",
        oracle: float = float("nan"),
    ) -> Dict[str, Any]:
        nan = float("nan")
        row: Dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.config.experiment,
            "solver": solver,
            "series": task.series.label,
            "sweep_variable": task.sweep_variable,
            "sweep_value": task.sweep_value,
            "lambda": task.scenario_fields.get("lam", nan),
            "r_min": task.scenario_fields.get("r_min", 0.0),
            "feasible": False,
            "branch": branch,
            "oracle_value": oracle,
            "starred": task.starred,
        }
        for name in ("kappa", "p_c", "p1", "p2", "r1", "r2", "rc1", "rc2", "rc", "r_tot"):
            row[name] = nan

        if scenario is not None and alloc is not None and report is not None:
            row["feasible"] = is_feasible(scenario, alloc, report)
            alloc = scenario.to_original_labels(alloc)
            report = scenario.to_original_labels(report)
            row.update(alloc.to_dict())
            row.update(report.to_dict())
        return row


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """Write rows with a fixed column order and ``\\n`` line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, columns=list(CSV_COLUMNS), lineterminator="\n")
    return path


def run(config: ExperimentConfig, output: Optional[Union[str, Path]] = None, **runner_options: Any) -> Path:
    """
    Run an experiment sweep and write its CSV.

    Args:
        config: Validated experiment config
        output: CSV path (``config.output_path()`` if omitted)
        **runner_options: Passed to ``SweepRunner``

    Returns:
        Path of the written CSV
    """
    frame = SweepRunner(config, **runner_options).run()
    path = write_csv(frame, output or config.output_path())
    infeasible = int((~frame["feasible"].astype(bool)).sum())
    logger.info(f"Wrote {len(frame)} rows to {path} ({infeasible} infeasible)")
    return path
