"""Brute-force grid oracle used to verify the closed-form and learned solvers."""

from .grid_search import (
    CommonGridResult,
    GridResult,
    GridSpec,
    grid_common,
    grid_private,
    grid_sum_rate,
    resolution_bound,
)

__all__ = [
    "CommonGridResult",
    "GridResult",
    "GridSpec",
    "grid_common",
    "grid_private",
    "grid_sum_rate",
    "resolution_bound",
]
