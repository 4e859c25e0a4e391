"""
Exhaustive grid search over allocations.

The oracle shares nothing with the closed-form solvers beyond the rate
formulas: it evaluates every grid point, drops the points that break a
constraint and keeps the best. The four-dimensional searches are chunked
along kappa; chunks may run on a thread pool and are reduced in kappa order,
so the result does not depend on chunking or on completion order.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from ..channel.models import Allocation, Scenario
from ..channel.rate_engine import rate_arrays
from ..utils.errors import DomainError, InfeasibleError
from ..utils.logger import get_logger

logger = get_logger(__name__)

BUDGET_SLACK = 1e-12
RATE_SLACK = 1e-12
OBJECTIVES = ("sum_rate", "private", "common")


@dataclass(frozen=True)
class GridSpec:
    """Number of grid points per decision variable."""

    n_kappa: int = 201
    n_pc: int = 101
    n_p1: int = 101
    n_p2: int = 101

    def __post_init__(self):
        for name in ("n_kappa", "n_pc", "n_p1", "n_p2"):
            if getattr(self, name) < 2:
                raise DomainError(f"{name} must be >= 2, got {getattr(self, name)}")

    @classmethod
    def default(cls) -> "GridSpec":
        return cls()

    @classmethod
    def verify(cls) -> "GridSpec":
        """Dense preset used by ``--verify``."""
        return cls(n_kappa=801, n_pc=401, n_p1=401, n_p2=401)

    def axes(self, scenario: Scenario) -> Dict[str, np.ndarray]:
        """Grid axes: kappa in [0, 1], p_c in [tau_sic, P], p1 and p2 in [0, P]."""
        budget = scenario.power_budget
        return {
            "kappa": np.linspace(0.0, 1.0, self.n_kappa),
            "p_c": np.linspace(scenario.tau_sic, budget, self.n_pc),
            "p1": np.linspace(0.0, budget, self.n_p1),
            "p2": np.linspace(0.0, budget, self.n_p2),
        }

    def steps(self, scenario: Scenario) -> Dict[str, float]:
        return {name: float(axis[1] - axis[0]) for name, axis in self.axes(scenario).items()}


class GridResult(NamedTuple):
    best_alloc: Allocation
    best_value: float


class CommonGridResult(NamedTuple):
    best_kappa: float
    best_pc: float
    best_rc: float


def _objective(scenario: Scenario, objective: str, p_c, p1, p2, kappa) -> Tuple[np.ndarray, dict]:
    rates = rate_arrays(scenario, p_c, p1, p2, kappa)
    if objective == "sum_rate":
        return np.asarray(rates["r_tot"]), rates
    if objective == "private":
        return np.asarray(rates["r1"] + rates["r2"]), rates
    if objective == "common":
        return np.asarray(rates["rc"]), rates
    raise DomainError(f"unknown objective '{objective}', expected one of {OBJECTIVES}")


def _chunk_best(
    scenario: Scenario, objective: str, enforce_rates: bool, kappas: np.ndarray, axes: Dict[str, np.ndarray]
) -> Tuple[float, int]:
    """Best value and flat index (within the chunk) of one kappa chunk."""
    kappa = kappas[:, None, None, None]
    p_c = axes["p_c"][None, :, None, None]
    p1 = axes["p1"][None, None, :, None]
    p2 = axes["p2"][None, None, None, :]

    values, rates = _objective(scenario, objective, p_c, p1, p2, kappa)
    feasible = p_c + p1 + p2 <= scenario.power_budget * (1.0 + BUDGET_SLACK)
    if enforce_rates:
        feasible = feasible & (rates["r1"] >= scenario.r_min - RATE_SLACK)
        feasible = feasible & (rates["r2"] >= scenario.r_min - RATE_SLACK)
    feasible = np.broadcast_to(feasible, values.shape)

    masked = np.where(feasible, values, -np.inf)
    index = int(np.argmax(masked))
    return float(masked.flat[index]), index


def _search(
    scenario: Scenario,
    spec: GridSpec,
    objective: str,
    enforce_rates: bool,
    workers: int = 1,
    chunk_size: int = 1,
) -> GridResult:
    axes = spec.axes(scenario)
    kappas = axes["kappa"]
    chunks: List[np.ndarray] = [kappas[i : i + chunk_size] for i in range(0, len(kappas), chunk_size)]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(
                executor.map(lambda c: _chunk_best(scenario, objective, enforce_rates, c, axes), chunks)
            )
    else:
        results = [_chunk_best(scenario, objective, enforce_rates, c, axes) for c in chunks]

    best_value, best_flat = -np.inf, -1
    inner = spec.n_pc * spec.n_p1 * spec.n_p2
    for chunk_number, (value, index) in enumerate(results):
        if value > best_value:
            best_value = value
            best_flat = chunk_number * chunk_size * inner + index

    if not np.isfinite(best_value):
        raise InfeasibleError(f"no grid point satisfies the constraints of the {objective} problem")

    i_kappa, i_pc, i_p1, i_p2 = np.unravel_index(best_flat, (spec.n_kappa, spec.n_pc, spec.n_p1, spec.n_p2))
    alloc = Allocation(
        p_c=float(axes["p_c"][i_pc]),
        p1=float(axes["p1"][i_p1]),
        p2=float(axes["p2"][i_p2]),
        kappa=float(kappas[i_kappa]),
    )
    logger.debug(f"grid {objective}: best {best_value:.6g} at {alloc.to_dict()}")
    return GridResult(best_alloc=alloc, best_value=best_value)


def grid_sum_rate(
    scenario: Scenario, spec: Optional[GridSpec] = None, workers: int = 1, chunk_size: int = 1
) -> GridResult:
    """
    Best sum rate on the grid with every constraint enforced.

    Ties go to the lexicographically smallest (kappa, p_c, p1, p2).

    Raises:
        InfeasibleError: no grid point is feasible
    """
    return _search(scenario, spec or GridSpec.default(), "sum_rate", True, workers, chunk_size)


def grid_private(
    scenario: Scenario, spec: Optional[GridSpec] = None, workers: int = 1, chunk_size: int = 1
) -> GridResult:
    """Best private sum rate on the grid (SIC floor and power budget only)."""
    return _search(scenario, spec or GridSpec.default(), "private", False, workers, chunk_size)


def grid_common(
    scenario: Scenario, p1: float, p2: float, spec: Optional[GridSpec] = None
) -> CommonGridResult:
    """
    Best common rate over a (kappa, p_c) grid at fixed private powers.

    p_c spans [tau_sic, D] with D = P - p1 - p2.

    Raises:
        InfeasibleError: no grid point is feasible
    """
    spec = spec or GridSpec.default()
    budget = scenario.power_budget - p1 - p2
    if budget < scenario.tau_sic:
        raise InfeasibleError(f"budget D={budget:.6g} below tau_sic={scenario.tau_sic:.6g}")

    kappas = np.linspace(0.0, 1.0, spec.n_kappa)
    powers = np.linspace(scenario.tau_sic, budget, spec.n_pc)
    kappa, p_c = kappas[:, None], powers[None, :]

    values, rates = _objective(scenario, "common", p_c, p1, p2, kappa)
    feasible = (rates["r1"] >= scenario.r_min - RATE_SLACK) & (rates["r2"] >= scenario.r_min - RATE_SLACK)
    masked = np.where(np.broadcast_to(feasible, values.shape), values, -np.inf)
    index = int(np.argmax(masked))
    if not np.isfinite(masked.flat[index]):
        raise InfeasibleError("no (kappa, p_c) grid point meets both rate constraints")

    i_kappa, i_pc = np.unravel_index(index, masked.shape)
    return CommonGridResult(
        best_kappa=float(kappas[i_kappa]), best_pc=float(powers[i_pc]), best_rc=float(masked.flat[index])
    )


def resolution_bound(
    scenario: Scenario,
    spec: GridSpec,
    alloc: Allocation,
    objective: str = "sum_rate",
    safety: float = 2.0,
) -> float:
    """
    Largest gap expected between a continuous optimum and the best grid point.

    Local Lipschitz estimate (central differences at ``alloc``) times the grid
    step, summed over the searched variables. For ``objective="common"`` only
    kappa and p_c are searched and the p_c step is taken over [tau_sic, D].
    """
    steps = spec.steps(scenario)
    if objective == "common":
        budget = scenario.power_budget - alloc.p1 - alloc.p2
        steps = {
            "kappa": steps["kappa"],
            "p_c": max(budget - scenario.tau_sic, 0.0) / (spec.n_pc - 1),
        }

    point = alloc.to_dict()
    total = 0.0
    for name, step in steps.items():
        h = 1e-6 * max(1.0, abs(point[name]))
        lower = dict(point)
        upper = dict(point)
        lower[name] = point[name] - h
        upper[name] = point[name] + h
        if name == "kappa":
            lower[name] = max(lower[name], 0.0)
            upper[name] = min(upper[name], 1.0)
        else:
            lower[name] = max(lower[name], 0.0)
        f_low, _ = _objective(scenario, objective, lower["p_c"], lower["p1"], lower["p2"], lower["kappa"])
        f_up, _ = _objective(scenario, objective, upper["p_c"], upper["p1"], upper["p2"], upper["kappa"])
        slope = abs(float(f_up) - float(f_low)) / (upper[name] - lower[name])
        total += slope * step
    return safety * total + 1e-9
