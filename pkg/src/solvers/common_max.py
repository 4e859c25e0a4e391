"""
Common-rate maximization at fixed private powers.

With p1, p2 fixed, R_c reduces to the weak user's common rate R_c2, which
grows with p_c and shrinks with kappa. A private-rate constraint R_k = R_min
that binds turns into a quadratic in p_c whose positive root p_c(kappa) grows
with kappa. Along that binding manifold R_c2 is monotone in kappa with the
sign of an indicator M, which gives the piecewise optimum:

    kappa* = 1                      if M > 0 and p_c(1) <= D
    kappa* = kappa(D)               if M > 0 and p_c(1) > D
    kappa* = 0                      if M <= 0

with D = P - p1 - p2. Both binding users are analysed and the better
candidate that satisfies both constraints wins.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Tuple

import numpy as np

from .base_solver import BaseSolver
from ..channel.models import Allocation, RateReport, Scenario, kappa_value
from ..channel.rate_engine import common_rate_k, full_report, private_rate
from ..utils.errors import (
    DegenerateRegimeError,
    DomainError,
    KappaOutOfRangeError,
    NoPositiveRootError,
)

DISCRIMINANT_GUARD = -1e-12
RATE_TOLERANCE = 1e-9
KAPPA_TOLERANCE = 1e-12


class Branch(str, Enum):
    """Which rule produced a common-max candidate."""

    MAX_IMPROPRIETY = "max_impropriety"
    BUDGET_LIMITED = "budget_limited"
    PROPER = "proper"
    FLOOR_LIFTED = "floor_lifted"
    UNCONSTRAINED = "unconstrained"
    DEGENERATE = "degenerate"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class QuadraticCoeffs:
    """Coefficients of B1 p_c^2 + B2 p_c + B3 = 0 for the binding user."""

    s: float
    b1: float
    b2: float
    b3: float
    binding_user: int

    def residual(self, p_c: float) -> float:
        return self.b1 * p_c * p_c + self.b2 * p_c + self.b3

    @property
    def scale(self) -> float:
        return max(abs(self.b1), abs(self.b2), abs(self.b3))


@dataclass(frozen=True)
class MonotonicityIndicator:
    """
    Slope indicator of R_c2 along the binding manifold.

    ``value`` is the exact indicator used by the solver; ``printed`` is the
    closed form as usually quoted, kept for comparison; ``c`` is C_k.
    """

    case_id: int
    value: float
    c: float
    printed: float


@dataclass(frozen=True)
class CommonMaxSolution:
    """Result of the common-rate problem for fixed private powers."""

    feasible: bool
    binding_user: Optional[int]
    kappa_star: float
    p_c_star: float
    rc: float
    branch: Branch
    p1: float = 0.0
    p2: float = 0.0
    report: Optional[RateReport] = None

    @property
    def allocation(self) -> Allocation:
        return Allocation(p_c=self.p_c_star, p1=self.p1, p2=self.p2, kappa=self.kappa_star)


def _binding_terms(scenario: Scenario, p1: float, p2: float, binding_user: int) -> Tuple[float, float, float]:
    """Return (Gamma_k, p_k, p_j) for the binding user."""
    if binding_user == 1:
        return scenario.gamma1, p1, p2
    if binding_user == 2:
        return scenario.gamma2, p2, p1
    raise DomainError(f"binding user must be 1 or 2, got {binding_user}")


def _check_regime(scenario: Scenario) -> None:
    if scenario.lam <= 0.0:
        raise DegenerateRegimeError("lambda = 0: private rates do not depend on p_c or kappa")
    if scenario.snr_threshold <= 0.0:
        raise DegenerateRegimeError("R_min = 0: the private-rate constraints never bind")


def quad_coeffs(
    scenario: Scenario, p1: float, p2: float, binding_user: int, kappa: float
) -> QuadraticCoeffs:
    """
    Coefficients of the binding-rate quadratic R_k = R_min in p_c.

    Args:
        scenario: System description (lambda > 0, R_min > 0)
        p1: Private power of user 1
        p2: Private power of user 2
        binding_user: User whose constraint binds
        kappa: Circularity coefficient

    Returns:
        Quadratic coefficients
    """
    _check_regime(scenario)
    kappa = float(kappa_value(kappa))
    if not 0.0 <= kappa <= 1.0:
        raise DomainError(f"kappa must lie in [0, 1], got {kappa}")
    if p1 < 0 or p2 < 0:
        raise DomainError("private powers must be >= 0")

    gamma, p_k, p_j = _binding_terms(scenario, p1, p2, binding_user)
    s, lam2 = scenario.snr_threshold, scenario.lam ** 2
    interference = p_j * gamma + 1.0

    b1 = s * lam2 * lam2 * gamma * gamma * (1.0 - kappa * kappa)
    b2 = 2.0 * lam2 * gamma * (s * interference - p_k * gamma)
    b3 = s * interference * interference - p_k * gamma * (p_k * gamma + 2.0 * p_j * gamma + 2.0)
    return QuadraticCoeffs(s=s, b1=b1, b2=b2, b3=b3, binding_user=binding_user)


def pc_of_kappa(coeffs: QuadraticCoeffs) -> float:
    """
    Non-negative root of the binding quadratic.

    Returns ``math.inf`` when the constraint can never bind (B1 = 0, B2 <= 0).

    Raises:
        NoPositiveRootError: B3 > 0, i.e. the constraint fails even at p_c = 0
    """
    b1, b2, b3 = coeffs.b1, coeffs.b2, coeffs.b3
    if b3 > 0.0:
        raise NoPositiveRootError(
            f"user {coeffs.binding_user} misses R_min even without common power (B3={b3:.6g})"
        )

    if b1 == 0.0:
        if b2 > 0.0:
            return -b3 / b2
        return math.inf

    discriminant = b2 * b2 - 4.0 * b1 * b3
    if discriminant < 0.0:
        if discriminant < DISCRIMINANT_GUARD * max(1.0, coeffs.scale ** 2):
            raise NoPositiveRootError(f"negative discriminant {discriminant:.6g}")
        discriminant = 0.0
    root = math.sqrt(discriminant)

    if b2 > 0.0:
        return -2.0 * b3 / (b2 + root)
    return (-b2 + root) / (2.0 * b1)


def kappa_of_pc(scenario: Scenario, p1: float, p2: float, binding_user: int, p_c: float) -> float:
    """
    Squared circularity coefficient at which R_k = R_min holds with common power p_c.

    Raises:
        KappaOutOfRangeError: no kappa in [0, 1] makes the constraint bind at p_c
    """
    if p_c <= 0.0:
        raise DomainError(f"p_c must be > 0, got {p_c}")
    coeffs = quad_coeffs(scenario, p1, p2, binding_user, 0.0)
    gamma, _, _ = _binding_terms(scenario, p1, p2, binding_user)
    full_b1 = coeffs.s * scenario.lam ** 4 * gamma * gamma
    kappa_sq = 1.0 + (coeffs.b2 * p_c + coeffs.b3) / (full_b1 * p_c * p_c)

    if -KAPPA_TOLERANCE <= kappa_sq < 0.0:
        return 0.0
    if 1.0 < kappa_sq <= 1.0 + KAPPA_TOLERANCE:
        return 1.0
    if not 0.0 <= kappa_sq <= 1.0:
        raise KappaOutOfRangeError(
            f"binding at p_c={p_c:.6g} needs kappa^2={kappa_sq:.6g}", kappa_squared=kappa_sq
        )
    return kappa_sq


def monotonicity(scenario: Scenario, p1: float, p2: float, case_id: int) -> MonotonicityIndicator:
    """
    Indicator whose sign is the sign of dR_c2/dkappa along the binding manifold.

    Args:
        scenario: System description
        p1: Private power of user 1
        p2: Private power of user 2
        case_id: Binding user (1 or 2)

    Returns:
        Indicator with exact and quoted values
    """
    s, lam2 = scenario.snr_threshold, scenario.lam ** 2
    g1, g2 = scenario.gamma1, scenario.gamma2
    c2 = (p1 + p2) * g2 + 1.0

    if case_id == 1:
        c1 = (p1 + p2) * g1 + 1.0
        value = s * lam2 * g1 * c2 + p1 * g1 * g2 - s * (p2 * g1 + 1.0) * g2
        printed = s * lam2 * g1 * g1 * c1 + p1 * g1 * g2 - s * (p2 * g1 + 1.0) * g2
        return MonotonicityIndicator(case_id=1, value=value, c=c1, printed=printed)
    if case_id == 2:
        value = s * lam2 * c2 + p2 * g2 - s * (p1 * g2 + 1.0)
        printed = s * lam2 * c2 + 2.0 * p2 * g2 - 2.0 * s * (p1 * g2 + 1.0)
        return MonotonicityIndicator(case_id=2, value=value, c=c2, printed=printed)
    raise DomainError(f"case_id must be 1 or 2, got {case_id}")


def common_rate_on_manifold(
    scenario: Scenario, p1: float, p2: float, case_id: int, kappa: float
) -> Tuple[float, float]:
    """
    Weak user's common rate when user ``case_id`` binds at circularity ``kappa``.

    Returns:
        Tuple of (R_c2, p_c(kappa))
    """
    p_c = pc_of_kappa(quad_coeffs(scenario, p1, p2, case_id, kappa))
    if not math.isfinite(p_c):
        raise NoPositiveRootError(f"user {case_id} never binds at kappa={kappa}")
    return common_rate_k(scenario.gamma2, p_c, p1, p2, kappa), p_c


def _satisfies_rates(scenario: Scenario, p_c: float, p1: float, p2: float, kappa: float) -> bool:
    lam = scenario.lam
    r1 = private_rate(scenario.gamma1, p1, p2, p_c, lam, kappa)
    r2 = private_rate(scenario.gamma2, p2, p1, p_c, lam, kappa)
    return min(r1, r2) >= scenario.r_min - RATE_TOLERANCE


def common_rate_curve(
    scenario: Scenario, p1: float, p2: float, kappas: Iterable[float]
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Best feasible common rate for each kappa (the numeric R_c(kappa) curve).

    At fixed kappa R_c grows with p_c, so the best p_c is the smallest of the
    budget D and the two binding roots. Infeasible kappas yield NaN.

    Returns:
        Tuple of (rates, common powers)
    """
    kappas = np.asarray(list(kappas), dtype=float)
    budget = scenario.power_budget - p1 - p2
    rates = np.full(kappas.shape, np.nan)
    powers = np.full(kappas.shape, np.nan)
    if budget < scenario.tau_sic:
        return rates, powers

    degenerate = scenario.lam <= 0.0 or scenario.snr_threshold <= 0.0
    for i, kappa in enumerate(kappas):
        upper = budget
        if not degenerate:
            try:
                for user in (1, 2):
                    upper = min(upper, pc_of_kappa(quad_coeffs(scenario, p1, p2, user, kappa)))
            except NoPositiveRootError:
                continue
        if upper < scenario.tau_sic or not _satisfies_rates(scenario, upper, p1, p2, kappa):
            continue
        rates[i] = common_rate_k(scenario.gamma2, upper, p1, p2, kappa)
        powers[i] = upper
    return rates, powers


class CommonMaxSolver(BaseSolver):
    """Maximize R_c subject to R_1, R_2 >= R_min at fixed private powers."""

    def __init__(self, pgs: bool = False):
        """
        Initialize common-rate solver.

        Args:
            pgs: Restrict the common stream to proper signaling (kappa = 0)
        """
        super().__init__("common_max")
        self.pgs = pgs

    def solve(self, scenario: Scenario, p1: float, p2: float) -> CommonMaxSolution:
        """
        Solve the common-rate problem.

        Args:
            scenario: System description
            p1: Fixed private power of user 1
            p2: Fixed private power of user 2

        Returns:
            Best feasible candidate, or an infeasible verdict
        """
        if p1 < 0 or p2 < 0:
            raise DomainError("private powers must be >= 0")
        if p1 + p2 >= scenario.power_budget:
            raise DomainError(
                f"private powers p1+p2={p1 + p2:.6g} leave no room in P={scenario.power_budget}"
            )

        budget = scenario.power_budget - p1 - p2
        if budget < scenario.tau_sic:
            self.logger.info(f"budget D={budget:.6g} below tau_sic={scenario.tau_sic:.6g}")
            return self._infeasible(p1, p2)

        if self.pgs:
            candidates = [self._proper_only(scenario, p1, p2, budget)]
        elif scenario.lam <= 0.0 or scenario.snr_threshold <= 0.0:
            candidates = [self._degenerate(scenario, p1, p2, budget)]
        else:
            candidates = [self._solve_case(scenario, p1, p2, budget, case_id) for case_id in (1, 2)]

        feasible = [c for c in candidates if c is not None and c.feasible]
        if not feasible:
            self.logger.info("no binding case admits a feasible allocation")
            return self._infeasible(p1, p2)

        # Case 2 is evaluated last, so on ties it wins.
        best = feasible[0]
        for candidate in feasible[1:]:
            if candidate.rc >= best.rc - 1e-12:
                best = candidate

        self.logger.debug(
            f"common max: user {best.binding_user} binds, branch={best.branch.value}, "
            f"kappa*={best.kappa_star:.6g}, p_c*={best.p_c_star:.6g}, R_c={best.rc:.6g}"
        )
        return best

    def _solve_case(
        self, scenario: Scenario, p1: float, p2: float, budget: float, case_id: int
    ) -> Optional[CommonMaxSolution]:
        tau = scenario.tau_sic
        try:
            pc_proper = pc_of_kappa(quad_coeffs(scenario, p1, p2, case_id, 0.0))
        except NoPositiveRootError as exc:
            self.logger.debug(f"case {case_id}: {exc}")
            return None
        pc_improper = pc_of_kappa(quad_coeffs(scenario, p1, p2, case_id, 1.0))

        if pc_proper >= budget:
            kappa, p_c, branch = 0.0, budget, Branch.UNCONSTRAINED
        elif pc_improper < tau:
            self.logger.debug(f"case {case_id}: p_c(1)={pc_improper:.6g} below tau_sic")
            return None
        else:
            indicator = monotonicity(scenario, p1, p2, case_id)
            if indicator.value > 0.0 and pc_improper <= budget:
                kappa, p_c, branch = 1.0, pc_improper, Branch.MAX_IMPROPRIETY
            elif indicator.value > 0.0:
                coeffs = quad_coeffs(scenario, p1, p2, case_id, 0.0)
                gamma, _, _ = _binding_terms(scenario, p1, p2, case_id)
                full_b1 = coeffs.s * scenario.lam ** 4 * gamma * gamma
                kappa_sq = 1.0 + (coeffs.b2 * budget + coeffs.b3) / (full_b1 * budget * budget)
                kappa, p_c, branch = math.sqrt(min(max(kappa_sq, 0.0), 1.0)), budget, Branch.BUDGET_LIMITED
            else:
                kappa, p_c, branch = 0.0, pc_proper, Branch.PROPER

            if p_c < tau:
                kappa_sq = kappa_of_pc(scenario, p1, p2, case_id, tau) if tau > 0 else 0.0
                kappa, p_c, branch = math.sqrt(kappa_sq), tau, Branch.FLOOR_LIFTED

        return self._candidate(scenario, p1, p2, case_id, kappa, p_c, branch)

    def _degenerate(
        self, scenario: Scenario, p1: float, p2: float, budget: float
    ) -> Optional[CommonMaxSolution]:
        """lambda = 0 or R_min = 0: kappa = 0 and the whole budget on the common stream."""
        return self._candidate(scenario, p1, p2, None, 0.0, budget, Branch.DEGENERATE)

    def _proper_only(
        self, scenario: Scenario, p1: float, p2: float, budget: float
    ) -> Optional[CommonMaxSolution]:
        rates, powers = common_rate_curve(scenario, p1, p2, [0.0])
        if np.isnan(rates[0]):
            return None
        return self._candidate(scenario, p1, p2, None, 0.0, float(powers[0]), Branch.PROPER)

    def _candidate(
        self,
        scenario: Scenario,
        p1: float,
        p2: float,
        binding_user: Optional[int],
        kappa: float,
        p_c: float,
        branch: Branch,
    ) -> Optional[CommonMaxSolution]:
        kappa = min(max(kappa, 0.0), 1.0)
        if not _satisfies_rates(scenario, p_c, p1, p2, kappa):
            self.logger.debug(
                f"candidate from user {binding_user} ({branch.value}) violates a rate constraint"
            )
            return None
        report = full_report(scenario, Allocation(p_c=p_c, p1=p1, p2=p2, kappa=kappa))
        return CommonMaxSolution(
            feasible=True,
            binding_user=binding_user,
            kappa_star=kappa,
            p_c_star=p_c,
            rc=report.rc2,
            branch=branch,
            p1=p1,
            p2=p2,
            report=report,
        )

    @staticmethod
    def _infeasible(p1: float, p2: float) -> CommonMaxSolution:
        return CommonMaxSolution(
            feasible=False,
            binding_user=None,
            kappa_star=float("nan"),
            p_c_star=float("nan"),
            rc=float("nan"),
            branch=Branch.INFEASIBLE,
            p1=p1,
            p2=p2,
        )
