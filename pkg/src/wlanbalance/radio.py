"""
Radio model: geometry to SNR, SNR to PHY rate, SNR and length to packet error rate.

Log-distance path loss referenced to 1 m, a tiered rate table in the style of
an 802.11 rate-adaptation lookup, and a per-tier logistic PER curve scaled by
packet length. Everything here is a pure function of immutable inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .errors import UnknownEntityError

if TYPE_CHECKING:
    from .scenario import Scenario

REFERENCE_DISTANCE_M = 1.0
DEFAULT_PER_OFFSET_DB = 5.0
DEFAULT_PER_SLOPE = 1.0
DEFAULT_REFERENCE_PACKET_BITS = 12000


@dataclass(frozen=True)
class RadioParams:
    """Transmit/receive constants shared by every access point of a scenario."""

    tx_power: float = 20.0  # dBm
    noise_floor: float = -90.0  # dBm
    ref_loss: float = 40.0  # dB at 1 m
    pathloss_exponent: float = 3.0

    def __post_init__(self):
        if not self.noise_floor < self.tx_power:
            raise ValueError(
                f"noise_floor ({self.noise_floor} dBm) must be below tx_power ({self.tx_power} dBm)"
            )
        if not 1.5 <= self.pathloss_exponent <= 6.0:
            raise ValueError(
                f"pathloss_exponent {self.pathloss_exponent} out of range [1.5, 6.0]"
            )
        if self.ref_loss <= 0:
            raise ValueError(f"ref_loss must be positive, got {self.ref_loss}")


@dataclass(frozen=True)
class RateTier:
    min_snr: float  # dB
    phy_rate_kbps: float


@dataclass(frozen=True)
class RateTable:
    """Rate tiers ordered by descending SNR threshold."""

    tiers: tuple[RateTier, ...]

    def __post_init__(self):
        if not self.tiers:
            raise ValueError("rate table needs at least one tier")
        for upper, lower in zip(self.tiers, self.tiers[1:]):
            if not upper.min_snr > lower.min_snr:
                raise ValueError("rate tier thresholds must be strictly decreasing")
            if not upper.phy_rate_kbps > lower.phy_rate_kbps:
                raise ValueError("rate tier rates must be strictly decreasing")
        if any(tier.phy_rate_kbps <= 0 for tier in self.tiers):
            raise ValueError("rate tier rates must be positive")

    @classmethod
    def from_pairs(cls, pairs) -> RateTable:
        return cls(tuple(RateTier(float(snr), float(rate)) for snr, rate in pairs))

    @property
    def lowest_snr(self) -> float:
        return self.tiers[-1].min_snr

    def tier_index(self, snr: float) -> int | None:
        """Index of the highest tier whose threshold is met, None when the link is down."""
        for index, tier in enumerate(self.tiers):
            if snr >= tier.min_snr:
                return index
        return None

    def to_pairs(self) -> list[list[float]]:
        return [[tier.min_snr, tier.phy_rate_kbps] for tier in self.tiers]


# 802.11b-like: 11 / 5.5 / 2 / 1 Mbps
DEFAULT_RATE_TABLE = RateTable.from_pairs(
    [(25.0, 11000.0), (18.0, 5500.0), (10.0, 2000.0), (4.0, 1000.0)]
)


@dataclass(frozen=True)
class PerTier:
    midpoint: float  # dB, SNR at which a reference packet fails half the time
    slope: float  # per dB


@dataclass(frozen=True)
class PerModel:
    """Per-tier logistic packet error curves, aligned index by index with a RateTable."""

    tiers: tuple[PerTier, ...]
    reference_packet: int = DEFAULT_REFERENCE_PACKET_BITS  # bits

    def __post_init__(self):
        if self.reference_packet <= 0:
            raise ValueError("reference_packet must be positive")
        for tier in self.tiers:
            if tier.slope <= 0:
                raise ValueError(f"PER slope must be positive, got {tier.slope}")

    @classmethod
    def for_table(
        cls,
        table: RateTable,
        offset_db: float = DEFAULT_PER_OFFSET_DB,
        slope: float = DEFAULT_PER_SLOPE,
        reference_packet: int = DEFAULT_REFERENCE_PACKET_BITS,
    ) -> PerModel:
        """Midpoints a fixed offset below each tier's selection threshold."""
        return cls(
            tuple(PerTier(tier.min_snr - offset_db, slope) for tier in table.tiers),
            reference_packet,
        )

    def check_against(self, table: RateTable) -> None:
        """Selected rates must fail a reference packet less than half the time."""
        if len(self.tiers) != len(table.tiers):
            raise ValueError(
                f"PER model has {len(self.tiers)} tiers, rate table has {len(table.tiers)}"
            )
        for index, (per, rate) in enumerate(zip(self.tiers, table.tiers)):
            if not per.midpoint < rate.min_snr:
                raise ValueError(
                    f"PER tier {index}: midpoint {per.midpoint} dB must lie below "
                    f"the rate threshold {rate.min_snr} dB"
                )


def path_loss_db(distance: float, params: RadioParams) -> float:
    """Log-distance path loss in dB."""
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance} m")
    return params.ref_loss + 10.0 * params.pathloss_exponent * math.log10(
        distance / REFERENCE_DISTANCE_M
    )


def snr_db(ap: str, station: str, scenario: Scenario) -> float:
    """SNR of the downlink from ``ap`` to ``station``; explicit overrides win over geometry."""
    access_point = scenario.access_point(ap)
    receiver = scenario.station(station)

    override = scenario.snr_overrides.get((access_point.id, receiver.id))
    if override is not None:
        return override

    distance = math.dist(access_point.position, receiver.position)
    radio = scenario.radio
    return radio.tx_power - path_loss_db(distance, radio) - radio.noise_floor


def phy_rate_kbps(snr: float, table: RateTable) -> float:
    index = table.tier_index(snr)
    return 0.0 if index is None else table.tiers[index].phy_rate_kbps


def _logistic_tail(x: float) -> float:
    # 1 / (1 + exp(x)) without overflow for large |x|
    if x >= 0:
        z = math.exp(-x)
        return z / (1.0 + z)
    return 1.0 / (1.0 + math.exp(x))


def packet_error_prob(snr: float, tier: int, packet: int, model: PerModel) -> float:
    """Probability that one transmission attempt of ``packet`` bits fails at ``snr``."""
    if packet <= 0:
        raise ValueError(f"packet size must be positive, got {packet} bits")
    if not 0 <= tier < len(model.tiers):
        raise UnknownEntityError(f"unknown rate tier {tier}")

    curve = model.tiers[tier]
    base = _logistic_tail(curve.slope * (snr - curve.midpoint))
    per = 1.0 - (1.0 - base) ** (packet / model.reference_packet)
    return min(1.0, max(0.0, per))
