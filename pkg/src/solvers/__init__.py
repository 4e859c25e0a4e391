"""Closed-form and verified-search solvers for the private and common rate problems."""

from .base_solver import BaseSolver
from .private_max import PrivateMaxSolution, PrivateMaxSolver, theorem1_witness
from .common_max import (
    Branch,
    CommonMaxSolution,
    CommonMaxSolver,
    MonotonicityIndicator,
    QuadraticCoeffs,
    common_rate_curve,
    common_rate_on_manifold,
    kappa_of_pc,
    monotonicity,
    pc_of_kappa,
    quad_coeffs,
)

__all__ = [
    "BaseSolver",
    "Branch",
    "CommonMaxSolution",
    "CommonMaxSolver",
    "MonotonicityIndicator",
    "PrivateMaxSolution",
    "PrivateMaxSolver",
    "QuadraticCoeffs",
    "common_rate_curve",
    "common_rate_on_manifold",
    "kappa_of_pc",
    "monotonicity",
    "pc_of_kappa",
    "quad_coeffs",
    "theorem1_witness",
]
