"""
Sum-rate environment seen by the agent.

Every episode is a contextual bandit: the state is the scenario itself, it
does not change between steps, and each action is scored independently by
the penalized sum rate.
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Mapping, Optional, Tuple

import numpy as np

from ..channel.models import Allocation, RateReport, Scenario
from ..channel.rate_engine import full_report
from ..utils.errors import DomainError

STATE_FEATURES = ("gamma1", "gamma2", "lam", "tau_sic", "noise_power", "power_budget")
SAMPLED_FIELDS = ("gamma1", "gamma2", "lam", "tau_sic", "power_budget")


def rate_violation(scenario: Scenario, r1: float, r2: float) -> float:
    """Total minimum-rate shortfall U = sum_k max(R_min - R_k, 0)."""
    return max(scenario.r_min - r1, 0.0) + max(scenario.r_min - r2, 0.0)


def reward(scenario: Scenario, alloc: Allocation, psi: float) -> float:
    """
    Penalized sum rate r = R_tot - psi * U.

    Args:
        scenario: System description
        alloc: Allocation proposed by the agent
        psi: Penalty weight on the minimum-rate shortfall

    Returns:
        Scalar reward
    """
    return penalized_sum_rate(scenario, full_report(scenario, alloc), psi)


def penalized_sum_rate(scenario: Scenario, report: RateReport, psi: float) -> float:
    return report.r_tot - psi * rate_violation(scenario, report.r1, report.r2)


def _unit(value: float) -> float:
    """Map [-1, 1] onto [0, 1], clipping first."""
    return (float(np.clip(value, -1.0, 1.0)) + 1.0) / 2.0


def action_to_allocation(raw: np.ndarray, scenario: Scenario, pgs: bool = False) -> Allocation:
    """
    Map a squashed action onto a feasible allocation.

    a1 places p_c in [tau_sic, P], a2 is the share of the remainder given to
    the private streams, a3 splits that share between users and a4 sets kappa.
    With ``pgs`` the action has three entries and kappa is 0.

    Args:
        raw: Action in [-1, 1]^4 (or [-1, 1]^3 with ``pgs``)
        scenario: System description
        pgs: Proper-signaling action space

    Returns:
        Allocation with p_c >= tau_sic, p_c + p1 + p2 <= P and kappa in [0, 1]
    """
    raw = np.asarray(raw, dtype=float).ravel()
    expected = 3 if pgs else 4
    if raw.size != expected:
        raise DomainError(f"expected an action of {expected} entries, got {raw.size}")

    budget, tau = scenario.power_budget, scenario.tau_sic
    p_c = min(tau + _unit(raw[0]) * (budget - tau), budget)
    remaining = max(budget - p_c, 0.0)
    private = _unit(raw[1]) * remaining
    p1 = _unit(raw[2]) * private
    p2 = max(private - p1, 0.0)

    # rounding can leave the total one ulp above P
    while p_c + p1 + p2 > budget:
        if p2 > 0.0:
            p2 = max(np.nextafter(p2, 0.0), 0.0)
        elif p1 > 0.0:
            p1 = max(np.nextafter(p1, 0.0), 0.0)
        else:
            p_c = max(np.nextafter(p_c, 0.0), tau)
            if p_c == tau:
                break

    kappa = 0.0 if pgs else _unit(raw[3])
    return Allocation(p_c=float(p_c), p1=float(p1), p2=float(p2), kappa=kappa)


@dataclass(frozen=True)
class StateScaler:
    """Fixed affine standardization s = (x - offset) / scale."""

    offset: Tuple[float, ...]
    scale: Tuple[float, ...]

    def __post_init__(self):
        if len(self.offset) != len(self.scale):
            raise DomainError("scaler offset and scale lengths differ")
        if any(s <= 0 or not np.isfinite(s) for s in self.scale):
            raise DomainError(f"scaler scales must be finite and > 0, got {self.scale}")

    def transform(self, raw: np.ndarray) -> np.ndarray:
        return (np.asarray(raw, dtype=float) - np.asarray(self.offset)) / np.asarray(self.scale)

    def inverse(self, state: np.ndarray) -> np.ndarray:
        return np.asarray(state, dtype=float) * np.asarray(self.scale) + np.asarray(self.offset)

    def to_dict(self) -> Dict[str, list]:
        return {"offset": list(self.offset), "scale": list(self.scale)}

    @classmethod
    def from_dict(cls, data: Mapping[str, list]) -> "StateScaler":
        return cls(offset=tuple(float(x) for x in data["offset"]), scale=tuple(float(x) for x in data["scale"]))


@dataclass(frozen=True)
class ScenarioSampler:
    """
    Draws training scenarios around a base scenario.

    ``ranges`` maps a field of ``SAMPLED_FIELDS`` to a (low, high) interval;
    fields listed in ``log_uniform`` are drawn uniformly in log scale. Fields
    without a range keep the base value. A sampled tau_sic is capped at P.
    """

    base: Scenario
    ranges: Mapping[str, Tuple[float, float]] = field(default_factory=dict)
    log_uniform: FrozenSet[str] = frozenset()

    def __post_init__(self):
        for name, (low, high) in self.ranges.items():
            if name not in SAMPLED_FIELDS:
                raise DomainError(f"cannot sample '{name}', expected one of {SAMPLED_FIELDS}")
            if not low <= high:
                raise DomainError(f"range for '{name}' is empty: ({low}, {high})")
            if name in self.log_uniform and low <= 0:
                raise DomainError(f"log-uniform range for '{name}' must be positive")

    @classmethod
    def fixed(cls, scenario: Scenario) -> "ScenarioSampler":
        """Sampler that always returns ``scenario``."""
        return cls(base=scenario)

    def sample(self, rng: np.random.Generator) -> Scenario:
        if not self.ranges:
            return self.base
        values: Dict[str, float] = {}
        for name in SAMPLED_FIELDS:
            if name not in self.ranges:
                continue
            low, high = self.ranges[name]
            if name in self.log_uniform:
                values[name] = float(np.exp(rng.uniform(np.log(low), np.log(high))))
            else:
                values[name] = float(rng.uniform(low, high))
        budget = values.get("power_budget", self.base.power_budget)
        values["tau_sic"] = min(values.get("tau_sic", self.base.tau_sic), budget)
        return self.base.with_updates(**values)

    def scaler(self) -> StateScaler:
        """Standardize each feature by the midpoint and half-width of its range."""
        base = dict(zip(STATE_FEATURES, self.base.state_vector()))
        offset, scale = [], []
        for name in STATE_FEATURES:
            if name in self.ranges:
                low, high = self.ranges[name]
                offset.append(0.5 * (low + high))
                scale.append(max(0.5 * (high - low), 1e-12))
            else:
                offset.append(base[name])
                scale.append(max(abs(base[name]), 1.0))
        return StateScaler(offset=tuple(offset), scale=tuple(scale))


def observe(scenario: Scenario, scaler: Optional[StateScaler]) -> np.ndarray:
    """Normalized state vector of ``scenario``."""
    raw = np.asarray(scenario.state_vector(), dtype=float)
    return raw if scaler is None else scaler.transform(raw)
