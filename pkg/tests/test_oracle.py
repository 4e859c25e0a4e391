"""Tests for the brute-force grid oracle."""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from src.channel import Allocation, Scenario, common_rate_k, full_report
from src.oracle import GridSpec, grid_common, grid_private, grid_sum_rate
from src.utils import DomainError, InfeasibleError


@pytest.fixture
def scenario():
    """Asymmetric scenario with a rate floor every grid below can meet."""
    return Scenario.create(gamma1=4.0, gamma2=1.0, lam=0.5, power_budget=4.0, tau_sic=1.0, r_min=0.1)


class TestGridSpec:
    """Test grid construction."""

    def test_counts_at_least_two(self):
        """Test a single-point axis is rejected."""
        with pytest.raises(DomainError):
            GridSpec(n_kappa=1)

    def test_axes_bounds(self, scenario):
        """Test kappa spans [0, 1], p_c spans [tau_sic, P] and private powers [0, P]."""
        axes = GridSpec(n_kappa=3, n_pc=4, n_p1=5, n_p2=5).axes(scenario)
        assert axes["kappa"].tolist() == [0.0, 0.5, 1.0]
        assert axes["p_c"][0] == 1.0 and axes["p_c"][-1] == 4.0
        assert axes["p1"][0] == 0.0 and axes["p2"][-1] == 4.0


class TestGridSumRate:
    """Test the constrained sum-rate grid search."""

    def test_two_point_kappa_grid(self):
        """Test kappa = 1 wins once private power is present."""
        scenario = Scenario.create(gamma1=4.0, gamma2=1.0, lam=1.0, power_budget=2.0, tau_sic=1.0)
        result = grid_sum_rate(scenario, GridSpec(n_kappa=2, n_pc=2, n_p1=3, n_p2=3))

        assert result.best_alloc.kappa.kappa == 1.0
        assert result.best_alloc.p_c == 1.0
        assert (result.best_alloc.p1, result.best_alloc.p2) == (1.0, 0.0)
        # r1 = log2(65/9)/2 and rc = rc2 = 1/2
        assert result.best_value == pytest.approx(0.5 * math.log2(65.0 / 9.0) + 0.5, abs=1e-12)

    def test_four_point_hand_grid(self):
        """Test the argmax of the four feasible points of a symmetric, perfect-SIC grid."""
        scenario = Scenario.create(gamma1=1.0, gamma2=1.0, lam=0.0, power_budget=2.0, tau_sic=1.0)
        # only p1 = p2 = 0 fits the budget, leaving (kappa, p_c) in {0, 1} x {1, 2}
        by_hand = {
            (0.0, 1.0): 1.0,
            (0.0, 2.0): math.log2(3.0),
            (1.0, 1.0): 0.5 * math.log2(3.0),
            (1.0, 2.0): 0.5 * math.log2(5.0),
        }
        for (kappa, p_c), expected in by_hand.items():
            report = full_report(scenario, Allocation(p_c=p_c, p1=0.0, p2=0.0, kappa=kappa))
            assert report.r_tot == pytest.approx(expected, abs=1e-12)

        result = grid_sum_rate(scenario, GridSpec(n_kappa=2, n_pc=2, n_p1=2, n_p2=2))
        assert result.best_alloc == Allocation(p_c=2.0, p1=0.0, p2=0.0, kappa=0.0)
        assert result.best_value == pytest.approx(math.log2(3.0), abs=1e-12)

    def test_refined_grid_never_worse(self, scenario):
        """Test a grid containing the coarse points finds at least the coarse optimum."""
        coarse = grid_sum_rate(scenario, GridSpec(n_kappa=3, n_pc=5, n_p1=5, n_p2=5))
        refined = grid_sum_rate(scenario, GridSpec(n_kappa=5, n_pc=9, n_p1=9, n_p2=9))
        assert refined.best_value >= coarse.best_value

    def test_constraints_hold_at_argmax(self, scenario):
        """Test the returned point meets the budget, floor and rate constraints."""
        result = grid_sum_rate(scenario, GridSpec(n_kappa=5, n_pc=9, n_p1=9, n_p2=9))
        alloc = result.best_alloc
        report = full_report(scenario, alloc)
        assert alloc.total_power <= scenario.power_budget + 1e-12
        assert alloc.p_c >= scenario.tau_sic
        assert min(report.r1, report.r2) >= scenario.r_min - 1e-12
        assert report.r_tot == pytest.approx(result.best_value, abs=1e-12)

    def test_infeasible(self):
        """Test no feasible grid point raises InfeasibleError."""
        scenario = Scenario.create(gamma1=4.0, gamma2=1.0, lam=0.5, power_budget=2.0, tau_sic=1.0, r_min=5.0)
        with pytest.raises(InfeasibleError):
            grid_sum_rate(scenario, GridSpec(n_kappa=3, n_pc=3, n_p1=3, n_p2=3))

    @pytest.mark.parametrize("workers,chunk_size", [(2, 1), (3, 2), (4, 5), (1, 9)])
    def test_independent_of_chunking(self, scenario, workers, chunk_size):
        """Test workers and chunk size never change the result."""
        spec = GridSpec(n_kappa=9, n_pc=9, n_p1=9, n_p2=9)
        serial = grid_sum_rate(scenario, spec)
        chunked = grid_sum_rate(scenario, spec, workers=workers, chunk_size=chunk_size)
        assert chunked.best_alloc == serial.best_alloc
        assert chunked.best_value == serial.best_value

    def test_ties_go_to_smallest_index(self):
        """Test kappa-independent values resolve to kappa = 0 and p_c = tau_sic."""
        scenario = Scenario.create(gamma1=4.0, gamma2=1.0, lam=0.0, power_budget=4.0, tau_sic=1.0)
        spec = GridSpec(n_kappa=5, n_pc=5, n_p1=5, n_p2=5)
        result = grid_private(scenario, spec)
        assert result.best_alloc.kappa.kappa == 0.0
        assert result.best_alloc.p_c == 1.0
        assert grid_private(scenario, spec, workers=3, chunk_size=2).best_alloc == result.best_alloc


class TestGridPrivate:
    """Test the private sum-rate grid search."""

    def test_argmax_is_improper_at_sic_floor(self):
        """Test 100 random scenarios put the best point at kappa = 1 and p_c = tau_sic."""
        rng = np.random.default_rng(21)
        spec = GridSpec(n_kappa=5, n_pc=9, n_p1=17, n_p2=17)
        for _ in range(100):
            g2 = rng.uniform(0.1, 5.0)
            tau = rng.uniform(0.2, 2.0)
            scenario = Scenario.create(
                gamma1=g2 * rng.uniform(1.0, 30.0),
                gamma2=g2,
                lam=rng.uniform(0.2, 1.0),
                power_budget=tau + rng.uniform(1.0, 20.0),
                tau_sic=tau,
            )
            result = grid_private(scenario, spec)
            assert result.best_alloc.kappa.kappa == 1.0
            assert result.best_alloc.p_c == pytest.approx(scenario.tau_sic, abs=1e-12)
            assert result.best_value > 0.0

    def test_independent_of_chunking(self, scenario):
        """Test threaded and serial searches agree."""
        spec = GridSpec(n_kappa=7, n_pc=9, n_p1=9, n_p2=9)
        serial = grid_private(scenario, spec)
        threaded = grid_private(scenario, spec, workers=4, chunk_size=3)
        assert threaded == serial


class TestGridCommon:
    """Test the common-rate grid search at fixed private powers."""

    def test_rate_floor_too_high(self, scenario):
        """Test an unreachable R_min raises InfeasibleError."""
        demanding = scenario.with_updates(r_min=10.0)
        with pytest.raises(InfeasibleError):
            grid_common(demanding, 1.0, 1.0, GridSpec(n_kappa=11, n_pc=11))

    def test_budget_below_floor(self, scenario):
        """Test D < tau_sic raises InfeasibleError."""
        with pytest.raises(InfeasibleError):
            grid_common(scenario, 2.0, 1.5, GridSpec(n_kappa=11, n_pc=11))

    def test_perfect_sic_without_rate_floor(self):
        """Test lambda = 0 and R_min = 0 give kappa = 0 with all spare power on the common stream."""
        scenario = Scenario.create(gamma1=4.0, gamma2=1.0, lam=0.0, power_budget=6.0, tau_sic=1.0)
        result = grid_common(scenario, 1.0, 1.0, GridSpec(n_kappa=21, n_pc=31))
        assert result.best_kappa == 0.0
        assert result.best_pc == pytest.approx(4.0)
        assert result.best_rc == pytest.approx(common_rate_k(1.0, 4.0, 1.0, 1.0, 0.0), abs=1e-12)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
