"""Channel model and closed-form rate evaluation."""

from .models import (
    Allocation,
    ChannelParams,
    DerivativeParts,
    Impropriety,
    RateReport,
    Scenario,
    SicModel,
)
from .rate_engine import (
    common_rate_k,
    full_report,
    private_rate,
    private_rate_dkappa,
    private_rate_dpc,
    private_split_gradient,
    rate_arrays,
)

__all__ = [
    "Allocation",
    "ChannelParams",
    "DerivativeParts",
    "Impropriety",
    "RateReport",
    "Scenario",
    "SicModel",
    "common_rate_k",
    "full_report",
    "private_rate",
    "private_rate_dkappa",
    "private_rate_dpc",
    "private_split_gradient",
    "rate_arrays",
]
