"""
Closed-form achievable rates of the two-user RSMA downlink.

The common stream is improper with circularity coefficient kappa; private
streams are proper. After imperfect SIC a fraction lambda of the common stream
remains as interference on the private streams. All functions broadcast over
numpy arrays, so the grid oracle evaluates whole slices in one call; scalar
inputs return plain floats.
"""

import math
from typing import Any, Dict, Tuple

import numpy as np

from .models import Allocation, DerivativeParts, RateReport, Scenario, kappa_value
from ..utils.errors import DomainError

LN2 = math.log(2.0)
DENOMINATOR_FLOOR = 1e-300


def _output(value: Any) -> Any:
    return float(value) if np.ndim(value) == 0 else value


def _check(condition: Any, message: str) -> None:
    if not np.all(condition):
        raise DomainError(message)


def _validate(gamma_k=None, kappa=None, lam=None, **powers: Any) -> None:
    if gamma_k is not None:
        _check(np.isfinite(gamma_k) & (np.asarray(gamma_k) > 0), "CNR must be finite and > 0")
    if kappa is not None:
        kappa = np.asarray(kappa)
        _check((kappa >= 0.0) & (kappa <= 1.0), "kappa must lie in [0, 1]")
    if lam is not None:
        lam = np.asarray(lam)
        _check((lam >= 0.0) & (lam <= 1.0), "lambda must lie in [0, 1]")
    for name, value in powers.items():
        value = np.asarray(value)
        _check(np.isfinite(value) & (value >= 0.0), f"{name} must be finite and >= 0")


def _private_terms(gamma_k, p_k, p_j, p_c, lam, kappa) -> Tuple[Any, Any, Any, Any]:
    """Return (a, L, A1, A2) of the private-rate expression."""
    lam2 = np.square(lam)
    a = lam2 * p_c * gamma_k + p_j * gamma_k + 1.0
    pseudo = np.square(lam2 * kappa * p_c * gamma_k)
    a1 = 2.0 * lam2 * p_c * gamma_k + p_k * gamma_k + 2.0 * p_j * gamma_k + 2.0
    a2 = np.square(a) - pseudo
    if np.any(a2 < DENOMINATOR_FLOOR):
        raise DomainError("private-rate denominator is not positive")
    return a, pseudo, a1, a2


def private_rate(gamma_k, p_k, p_j, p_c, lam, kappa) -> Any:
    """
    Private rate of user k after imperfect SIC.

    Args:
        gamma_k: CNR of user k
        p_k: Private power of user k
        p_j: Private power of the other user
        p_c: Common-stream power
        lam: SIC residual coefficient
        kappa: Circularity coefficient of the common stream

    Returns:
        Rate in bits per channel use
    """
    kappa = kappa_value(kappa)
    _validate(gamma_k, kappa, lam, p_k=p_k, p_j=p_j, p_c=p_c)
    _, _, a1, a2 = _private_terms(gamma_k, p_k, p_j, p_c, lam, kappa)
    return _output(0.5 * np.log2(1.0 + p_k * gamma_k * a1 / a2))


def common_rate_k(gamma_k, p_c, p1, p2, kappa) -> Any:
    """
    Rate at which user k decodes the common stream.

    Args:
        gamma_k: CNR of user k
        p_c: Common-stream power
        p1: Private power of user 1
        p2: Private power of user 2
        kappa: Circularity coefficient of the common stream

    Returns:
        Rate in bits per channel use
    """
    kappa = kappa_value(kappa)
    _validate(gamma_k, kappa, p_c=p_c, p1=p1, p2=p2)
    interference = (p1 + p2) * gamma_k + 1.0
    total = interference + p_c * gamma_k
    numerator = np.square(total) - np.square(kappa * p_c * gamma_k)
    return _output(0.5 * np.log2(numerator / np.square(interference)))


def rate_arrays(scenario: Scenario, p_c, p1, p2, kappa) -> Dict[str, Any]:
    """Evaluate every rate of ``scenario`` at (broadcast) allocation arrays."""
    kappa = kappa_value(kappa)
    g1, g2, lam = scenario.gamma1, scenario.gamma2, scenario.lam
    r1 = private_rate(g1, p1, p2, p_c, lam, kappa)
    r2 = private_rate(g2, p2, p1, p_c, lam, kappa)
    rc1 = common_rate_k(g1, p_c, p1, p2, kappa)
    rc2 = common_rate_k(g2, p_c, p1, p2, kappa)
    rc = np.minimum(rc1, rc2)
    return {
        "r1": r1,
        "r2": r2,
        "rc1": rc1,
        "rc2": rc2,
        "rc": _output(rc),
        "r_tot": _output(r1 + r2 + rc),
    }


def full_report(scenario: Scenario, alloc: Allocation) -> RateReport:
    """All six rates of ``scenario`` at ``alloc``."""
    rates = rate_arrays(scenario, alloc.p_c, alloc.p1, alloc.p2, alloc.kappa.kappa)
    return RateReport(**{name: float(value) for name, value in rates.items()})


def private_rate_dpc(gamma_k, p_k, p_j, p_c, lam, kappa) -> Tuple[Any, DerivativeParts]:
    """
    Analytic derivative of the private rate with respect to the common power.

    Returns:
        Tuple of (dR_k/dp_c in bits per unit power, intermediate terms)
    """
    kappa = kappa_value(kappa)
    _validate(gamma_k, kappa, lam, p_k=p_k, p_j=p_j, p_c=p_c)
    a, _, a1, a2 = _private_terms(gamma_k, p_k, p_j, p_c, lam, kappa)
    lam2 = np.square(lam)
    a3 = a - lam2 * np.square(kappa) * p_c * gamma_k
    u = 1.0 + p_k * gamma_k * a1 / a2
    derivative = lam2 * p_k * np.square(gamma_k) * (a2 - a1 * a3) / (u * np.square(a2) * LN2)
    parts = DerivativeParts(a1=_output(a1), a2=_output(a2), a3=_output(a3), u=_output(u))
    return _output(derivative), parts


def private_rate_dkappa(gamma_k, p_k, p_j, p_c, lam, kappa) -> Any:
    """
    Analytic derivative of the private rate with respect to kappa.

    Only the pseudo-variance term depends on kappa and it enters both the
    signal-plus-interference and the interference determinants, so the
    derivative is dL/dkappa * (1/A2 - 1/T) / (2 ln 2) >= 0.
    """
    kappa = kappa_value(kappa)
    _validate(gamma_k, kappa, lam, p_k=p_k, p_j=p_j, p_c=p_c)
    _, _, a1, a2 = _private_terms(gamma_k, p_k, p_j, p_c, lam, kappa)
    total = a2 + p_k * gamma_k * a1
    d_pseudo = 2.0 * np.power(lam, 4) * kappa * np.square(p_c * gamma_k)
    return _output(d_pseudo * (1.0 / a2 - 1.0 / total) / (2.0 * LN2))


def private_split_gradient(scenario: Scenario, p1, p2, p_c, kappa) -> Any:
    """
    Derivative of R_1 + R_2 when power moves from user 2 to user 1.

    With p1 + p2 fixed, each user's signal-plus-interference term is constant,
    so only the interference determinants change.
    """
    kappa = kappa_value(kappa)
    lam = scenario.lam
    _validate(None, kappa, lam, p1=p1, p2=p2, p_c=p_c)
    g1, g2 = scenario.gamma1, scenario.gamma2
    a_1, _, _, a2_1 = _private_terms(g1, p1, p2, p_c, lam, kappa)
    a_2, _, _, a2_2 = _private_terms(g2, p2, p1, p_c, lam, kappa)
    return _output((a_1 * g1 / a2_1 - a_2 * g2 / a2_2) / LN2)
