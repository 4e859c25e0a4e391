"""Base solver abstract class for the RSMA power/impropriety optimizers."""

from abc import ABC, abstractmethod
from typing import Any

from ..channel.models import Scenario
from ..utils.errors import InfeasibleError
from ..utils.logger import get_logger


class BaseSolver(ABC):
    """Abstract base class for all closed-form and search-based solvers."""

    def __init__(self, name: str):
        """
        Initialize solver.

        Args:
            name: Solver name, also used as the CSV solver id
        """
        self.name = name
        self.logger = get_logger(f"{__name__}.{name}")

    @abstractmethod
    def solve(self, scenario: Scenario, *args: Any) -> Any:
        """
        Solve the solver's problem for one scenario.

        Args:
            scenario: System description
            *args: Problem-specific fixed variables

        Returns:
            Problem-specific solution record
        """

    @staticmethod
    def _spare_power(scenario: Scenario) -> float:
        """Power left for the private streams once the SIC floor is met."""
        spare = scenario.power_budget - scenario.tau_sic
        if spare < 0:
            raise InfeasibleError(
                f"tau_sic={scenario.tau_sic} exceeds the power budget P={scenario.power_budget}"
            )
        return spare
