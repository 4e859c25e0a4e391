"""Domain types for the two-user downlink RSMA system with an improper common stream."""

import math
from dataclasses import dataclass, field, asdict, replace
from typing import Any, Dict, Tuple, Union

from ..utils.errors import DomainError


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise DomainError(message)


def _finite(value: Any) -> bool:
    try:
        return math.isfinite(float(value))
    except (TypeError, ValueError):
        return False


@dataclass(frozen=True)
class ChannelParams:
    """Channel-to-noise ratios of the strong (1) and weak (2) user."""

    gamma1: float
    gamma2: float

    def __post_init__(self):
        _require(_finite(self.gamma1) and self.gamma1 > 0, f"gamma1 must be > 0, got {self.gamma1}")
        _require(_finite(self.gamma2) and self.gamma2 > 0, f"gamma2 must be > 0, got {self.gamma2}")
        _require(
            self.gamma1 >= self.gamma2,
            f"users must be ordered with gamma1 >= gamma2, got {self.gamma1} < {self.gamma2}",
        )

    @classmethod
    def ordered(cls, gamma_a: float, gamma_b: float) -> Tuple["ChannelParams", bool]:
        """
        Build channel parameters from two CNRs in arbitrary order.

        Args:
            gamma_a: CNR of the user labelled 1 by the caller
            gamma_b: CNR of the user labelled 2 by the caller

        Returns:
            Tuple of (ordered parameters, True if the labels were swapped)
        """
        if gamma_a >= gamma_b:
            return cls(gamma_a, gamma_b), False
        return cls(gamma_b, gamma_a), True

    @classmethod
    def from_gains(
        cls, h1: float, h2: float, noise_power: float = 1.0
    ) -> Tuple["ChannelParams", bool]:
        """Build ordered CNRs from channel magnitudes |h_k| and the noise power."""
        _require(_finite(noise_power) and noise_power > 0, f"noise_power must be > 0, got {noise_power}")
        return cls.ordered(abs(h1) ** 2 / noise_power, abs(h2) ** 2 / noise_power)

    def gamma(self, user: int) -> float:
        """CNR of user 1 or 2."""
        if user == 1:
            return self.gamma1
        if user == 2:
            return self.gamma2
        raise DomainError(f"user index must be 1 or 2, got {user}")


@dataclass(frozen=True)
class SicModel:
    """Imperfect SIC: fraction of the common stream left after cancellation."""

    lam: float

    def __post_init__(self):
        _require(_finite(self.lam) and 0.0 <= self.lam <= 1.0, f"lambda must lie in [0, 1], got {self.lam}")


@dataclass(frozen=True)
class Impropriety:
    """Circularity coefficient of the common stream (0 proper, 1 maximally improper)."""

    kappa: float

    def __post_init__(self):
        _require(_finite(self.kappa) and 0.0 <= self.kappa <= 1.0, f"kappa must lie in [0, 1], got {self.kappa}")

    def __float__(self) -> float:
        return float(self.kappa)


KappaLike = Union[Impropriety, float]


def kappa_value(kappa: Any) -> Any:
    """Unwrap an ``Impropriety`` into its coefficient; arrays and floats pass through."""
    return kappa.kappa if isinstance(kappa, Impropriety) else kappa


@dataclass(frozen=True)
class Allocation:
    """A decision point: common power, private powers and impropriety."""

    p_c: float
    p1: float
    p2: float
    kappa: Impropriety = field(default_factory=lambda: Impropriety(0.0))

    def __post_init__(self):
        if not isinstance(self.kappa, Impropriety):
            object.__setattr__(self, "kappa", Impropriety(float(self.kappa)))
        for name in ("p_c", "p1", "p2"):
            value = getattr(self, name)
            _require(_finite(value) and value >= 0.0, f"{name} must be >= 0, got {value}")

    @property
    def total_power(self) -> float:
        return self.p_c + self.p1 + self.p2

    def to_dict(self) -> Dict[str, float]:
        return {"kappa": self.kappa.kappa, "p_c": self.p_c, "p1": self.p1, "p2": self.p2}


@dataclass(frozen=True)
class Scenario:
    """
    Full system description.

    Users are stored ordered (gamma1 >= gamma2); ``swapped`` records whether the
    caller's labels were exchanged to achieve that ordering.
    """

    channel: ChannelParams
    sic: SicModel
    power_budget: float
    tau_sic: float
    r_min: float = 0.0
    noise_power: float = 1.0
    swapped: bool = False

    def __post_init__(self):
        _require(
            _finite(self.power_budget) and self.power_budget > 0,
            f"power budget must be > 0, got {self.power_budget}",
        )
        _require(
            _finite(self.tau_sic) and 0.0 <= self.tau_sic <= self.power_budget,
            f"tau_sic must lie in [0, P], got {self.tau_sic} with P={self.power_budget}",
        )
        _require(_finite(self.r_min) and self.r_min >= 0.0, f"r_min must be >= 0, got {self.r_min}")
        _require(
            _finite(self.noise_power) and self.noise_power > 0,
            f"noise_power must be > 0, got {self.noise_power}",
        )

    @classmethod
    def create(
        cls,
        gamma1: float,
        gamma2: float,
        lam: float,
        power_budget: float,
        tau_sic: float,
        r_min: float = 0.0,
        noise_power: float = 1.0,
    ) -> "Scenario":
        """Build a scenario from CNRs in any order, swapping users if needed."""
        channel, swapped = ChannelParams.ordered(gamma1, gamma2)
        return cls(
            channel=channel,
            sic=SicModel(lam),
            power_budget=power_budget,
            tau_sic=tau_sic,
            r_min=r_min,
            noise_power=noise_power,
            swapped=swapped,
        )

    @classmethod
    def from_gains(
        cls,
        h1: float,
        h2: float,
        lam: float,
        power_budget: float,
        tau_sic: float,
        r_min: float = 0.0,
        noise_power: float = 1.0,
    ) -> "Scenario":
        """Build a scenario from channel magnitudes |h_k| and the noise power."""
        channel, swapped = ChannelParams.from_gains(h1, h2, noise_power)
        return cls(channel, SicModel(lam), power_budget, tau_sic, r_min, noise_power, swapped)

    @property
    def gamma1(self) -> float:
        return self.channel.gamma1

    @property
    def gamma2(self) -> float:
        return self.channel.gamma2

    @property
    def lam(self) -> float:
        return self.sic.lam

    @property
    def snr_threshold(self) -> float:
        """S = 2^(2 R_min) - 1."""
        return 2.0 ** (2.0 * self.r_min) - 1.0

    def with_updates(self, **changes: Any) -> "Scenario":
        """Copy with fields replaced; ``gamma1``/``gamma2``/``lam`` are accepted as shortcuts."""
        gamma1 = changes.pop("gamma1", None)
        gamma2 = changes.pop("gamma2", None)
        lam = changes.pop("lam", None)
        if gamma1 is not None or gamma2 is not None:
            channel, swapped = ChannelParams.ordered(
                self.gamma1 if gamma1 is None else gamma1,
                self.gamma2 if gamma2 is None else gamma2,
            )
            changes["channel"] = channel
            changes["swapped"] = swapped
        if lam is not None:
            changes["sic"] = SicModel(lam)
        return replace(self, **changes)

    def to_internal_labels(self, item: Any) -> Any:
        """Map an ``Allocation`` given in the caller's labels onto the ordered users."""
        return self.to_original_labels(item)

    def to_original_labels(self, item: Any) -> Any:
        """Map an ``Allocation`` or ``RateReport`` back to the caller's user labels."""
        if not self.swapped:
            return item
        if isinstance(item, Allocation):
            return replace(item, p1=item.p2, p2=item.p1)
        if isinstance(item, RateReport):
            return replace(item, r1=item.r2, r2=item.r1, rc1=item.rc2, rc2=item.rc1)
        raise DomainError(f"cannot relabel object of type {type(item).__name__}")

    def state_vector(self) -> Tuple[float, float, float, float, float, float]:
        """Raw MDP state (gamma1, gamma2, lambda, tau_sic, noise power, P)."""
        return (self.gamma1, self.gamma2, self.lam, self.tau_sic, self.noise_power, self.power_budget)


@dataclass(frozen=True)
class RateReport:
    """All achievable rates at one allocation, in bits per channel use."""

    r1: float
    r2: float
    rc1: float
    rc2: float
    rc: float
    r_tot: float

    @classmethod
    def from_rates(cls, r1: float, r2: float, rc1: float, rc2: float) -> "RateReport":
        rc = min(rc1, rc2)
        return cls(r1=r1, r2=r2, rc1=rc1, rc2=rc2, rc=rc, r_tot=r1 + r2 + rc)

    @property
    def private_sum(self) -> float:
        return self.r1 + self.r2

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class DerivativeParts:
    """Intermediate terms of dR_k/dp_c."""

    a1: Any
    a2: Any
    a3: Any
    u: Any
