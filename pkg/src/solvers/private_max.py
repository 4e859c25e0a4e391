"""
Private sum-rate maximization.

Maximum impropriety (kappa = 1) maximizes both private rates and, at
kappa = 1, both rates fall with the common power, so the SIC floor binds:
p_c = tau_sic. What remains is a one-dimensional split of P' = P - tau_sic
between the private streams, solved by golden-section search and refined on
the stationarity condition.
"""

import math
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Tuple

import numpy as np

from .base_solver import BaseSolver
from ..channel.models import Allocation, Scenario
from ..channel.rate_engine import (
    private_rate,
    private_rate_dkappa,
    private_rate_dpc,
    private_split_gradient,
)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0

UNIMODALITY_SAMPLES = 65
FALLBACK_GRID_POINTS = 4097
TIE_TOLERANCE = 1e-12
BOUNDARY_SNAP = 1e-9


@dataclass(frozen=True)
class PrivateMaxSolution:
    """Optimal allocation for the private sum-rate problem."""

    alloc: Allocation
    objective: float
    kkt_residual: float
    unimodal: bool = True
    boundary: Optional[str] = None

    @property
    def spare_power(self) -> float:
        return self.alloc.p1 + self.alloc.p2


class Theorem1Witness(NamedTuple):
    """Signs of the private sum-rate slopes in kappa and in p_c."""

    d_obj_d_kappa_sign: int
    d_obj_d_pc_sign: int


def private_sum_slopes(scenario: Scenario, alloc: Allocation) -> Tuple[float, float]:
    """
    Slopes of R_1 + R_2 in kappa (at ``alloc``) and in p_c (at kappa = 1).

    Returns:
        Tuple of (d/dkappa, d/dp_c)
    """
    g1, g2, lam = scenario.gamma1, scenario.gamma2, scenario.lam
    p_c, p1, p2, kappa = alloc.p_c, alloc.p1, alloc.p2, alloc.kappa.kappa

    d_kappa = private_rate_dkappa(g1, p1, p2, p_c, lam, kappa) + private_rate_dkappa(
        g2, p2, p1, p_c, lam, kappa
    )
    d_pc_1, _ = private_rate_dpc(g1, p1, p2, p_c, lam, 1.0)
    d_pc_2, _ = private_rate_dpc(g2, p2, p1, p_c, lam, 1.0)
    return d_kappa, d_pc_1 + d_pc_2


def theorem1_witness(scenario: Scenario, alloc: Allocation) -> Theorem1Witness:
    """
    Numerically evaluated signs backing the maximum-impropriety result.

    Args:
        scenario: System description
        alloc: Point at which the slopes are evaluated

    Returns:
        Sign of d(R1+R2)/dkappa and sign of d(R1+R2)/dp_c at kappa = 1
    """
    d_kappa, d_pc = private_sum_slopes(scenario, alloc)
    return Theorem1Witness(int(np.sign(d_kappa)), int(np.sign(d_pc)))


def golden_section_max(
    objective: Callable[[float], float], lower: float, upper: float, tol: float
) -> Tuple[float, float]:
    """
    Golden-section search for the maximum of a unimodal function.

    Args:
        objective: 1-D function to maximize
        lower: Left end of the bracket
        upper: Right end of the bracket
        tol: Bracket width at which the search stops

    Returns:
        Tuple of (argmax, max value)
    """
    dist = upper - lower
    if dist <= tol:
        mid = 0.5 * (lower + upper)
        return mid, objective(mid)

    iterations = int(math.ceil(math.log(tol / dist) / math.log(INV_PHI)))
    c = lower + INV_PHI_SQ * dist
    d = lower + INV_PHI * dist
    fc, fd = objective(c), objective(d)

    for _ in range(max(iterations - 1, 0)):
        if fc > fd:
            upper, d, fd = d, c, fc
            dist *= INV_PHI
            c = lower + INV_PHI_SQ * dist
            fc = objective(c)
        else:
            lower, c, fc = c, d, fd
            dist *= INV_PHI
            d = lower + INV_PHI * dist
            fd = objective(d)

    best = 0.5 * (lower + d) if fc > fd else 0.5 * (c + upper)
    return best, objective(best)


class PrivateMaxSolver(BaseSolver):
    """Maximize R_1 + R_2 subject to p_c >= tau_sic and the power budget."""

    def __init__(self, pgs: bool = False, tol: float = 1e-12):
        """
        Initialize private-rate solver.

        Args:
            pgs: Restrict the common stream to proper signaling (kappa = 0)
            tol: Relative bracket tolerance of the split search
        """
        super().__init__("private_max")
        self.pgs = pgs
        self.tol = tol

    def solve(self, scenario: Scenario) -> PrivateMaxSolution:
        """
        Solve the private sum-rate problem.

        Args:
            scenario: System description

        Returns:
            Allocation with kappa = 1 (0 under PGS), p_c = tau_sic and the best split
        """
        spare = self._spare_power(scenario)
        kappa = 0.0 if self.pgs else 1.0
        p_c = scenario.tau_sic

        if spare <= 0.0:
            alloc = Allocation(p_c=p_c, p1=0.0, p2=0.0, kappa=kappa)
            return PrivateMaxSolution(alloc=alloc, objective=0.0, kkt_residual=0.0, boundary="empty")

        objective = self._split_objective(scenario, spare, p_c, kappa)
        tol = self.tol * max(1.0, spare)

        unimodal = self._is_unimodal(objective, spare)
        if unimodal:
            x, value = golden_section_max(objective, 0.0, spare, tol)
            coarse = np.linspace(0.0, spare, UNIMODALITY_SAMPLES)
            if max(objective(v) for v in coarse) > value + 1e-9:
                self.logger.debug("golden-section bracket inconsistent with coarse samples")
                unimodal = False

        if not unimodal:
            self.logger.warning(
                f"split objective is not unimodal for gamma=({scenario.gamma1:.4g}, "
                f"{scenario.gamma2:.4g}), lambda={scenario.lam:.4g}, P={scenario.power_budget:.4g}; "
                "using dense grid"
            )
            x, value = self._grid_search(objective, spare, tol)

        x = self._refine_stationary(scenario, objective, x, spare, p_c, kappa)
        snap = BOUNDARY_SNAP * max(1.0, spare)
        if x <= snap:
            x = 0.0
        elif x >= spare - snap:
            x = spare

        candidates = [x, 0.0, spare]
        p1 = self._pick_candidate(objective, candidates, spare)
        p2 = max(spare - p1, 0.0)

        alloc = Allocation(p_c=p_c, p1=p1, p2=p2, kappa=kappa)
        value = float(
            private_rate(scenario.gamma1, p1, p2, p_c, scenario.lam, kappa)
            + private_rate(scenario.gamma2, p2, p1, p_c, scenario.lam, kappa)
        )
        residual, boundary = self._kkt_residual(scenario, p1, spare, p_c, kappa)

        self.logger.debug(f"private split p1={p1:.6g}, p2={p2:.6g}, objective={value:.6g}")
        return PrivateMaxSolution(
            alloc=alloc,
            objective=value,
            kkt_residual=residual,
            unimodal=unimodal,
            boundary=boundary,
        )

    @staticmethod
    def _split_objective(
        scenario: Scenario, spare: float, p_c: float, kappa: float
    ) -> Callable[[float], float]:
        g1, g2, lam = scenario.gamma1, scenario.gamma2, scenario.lam

        def objective(p1):
            p1 = np.clip(p1, 0.0, spare)
            p2 = np.maximum(spare - p1, 0.0)
            return private_rate(g1, p1, p2, p_c, lam, kappa) + private_rate(g2, p2, p1, p_c, lam, kappa)

        return objective

    @staticmethod
    def _is_unimodal(objective: Callable, spare: float) -> bool:
        """Count peaks of the objective on a coarse sample, boundaries included."""
        values = np.asarray(objective(np.linspace(0.0, spare, UNIMODALITY_SAMPLES)))
        padded = np.concatenate(([-np.inf], values, [-np.inf]))
        rising = padded[1:-1] - padded[:-2] > TIE_TOLERANCE
        falling = padded[1:-1] - padded[2:] > TIE_TOLERANCE
        return int(np.count_nonzero(rising & falling)) <= 1

    @staticmethod
    def _grid_search(objective: Callable, spare: float, tol: float) -> Tuple[float, float]:
        grid = np.linspace(0.0, spare, FALLBACK_GRID_POINTS)
        values = np.asarray(objective(grid))
        best = int(np.argmax(values))
        lower = grid[max(best - 1, 0)]
        upper = grid[min(best + 1, FALLBACK_GRID_POINTS - 1)]
        x, value = golden_section_max(objective, lower, upper, tol)
        if value < values[best]:
            return float(grid[best]), float(values[best])
        return x, value

    @staticmethod
    def _refine_stationary(
        scenario: Scenario, objective: Callable, x: float, spare: float, p_c: float, kappa: float
    ) -> float:
        """Bisect the split gradient around ``x`` when the optimum is interior."""
        step = 1e-6 * max(1.0, spare)
        if x <= step or x >= spare - step:
            return x

        def gradient(p1: float) -> float:
            return private_split_gradient(scenario, p1, spare - p1, p_c, kappa)

        lower, upper = max(x - step, 0.0), min(x + step, spare)
        g_lower, g_upper = gradient(lower), gradient(upper)
        for _ in range(40):
            if g_lower > 0.0 >= g_upper:
                break
            lower, upper = max(lower - step, 0.0), min(upper + step, spare)
            g_lower, g_upper = gradient(lower), gradient(upper)
            step *= 2.0
        else:
            return x

        for _ in range(200):
            mid = 0.5 * (lower + upper)
            g_mid = gradient(mid)
            if g_mid > 0.0:
                lower = mid
            else:
                upper = mid
            if upper - lower <= 1e-15 * max(1.0, spare) or abs(g_mid) < 1e-13:
                break
        refined = 0.5 * (lower + upper)
        return refined if objective(refined) >= objective(x) - TIE_TOLERANCE else x

    @staticmethod
    def _pick_candidate(objective: Callable, candidates: List[float], spare: float) -> float:
        """Best candidate; near-ties go to the most balanced split."""
        values = [float(objective(c)) for c in candidates]
        best_value = max(values)
        tied = [c for c, v in zip(candidates, values) if v >= best_value - TIE_TOLERANCE]
        return min(tied, key=lambda c: max(c, spare - c))

    @staticmethod
    def _kkt_residual(
        scenario: Scenario, p1: float, spare: float, p_c: float, kappa: float
    ) -> Tuple[float, Optional[str]]:
        gradient = private_split_gradient(scenario, p1, max(spare - p1, 0.0), p_c, kappa)
        if p1 <= 0.0:
            return max(0.0, gradient), "p1=0"
        if p1 >= spare:
            return max(0.0, -gradient), "p2=0"
        return abs(gradient), None
