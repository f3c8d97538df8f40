"""
Topology, association state and per-AP load accounting.

Load is the sum of the declared offered bit rates of the stations associated
to an access point. ``NetworkState`` is treated as a value: ``associate``
returns a new state and leaves its argument untouched, so policies can try
hypothetical moves freely.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

from .errors import UnknownEntityError
from .radio import snr_db

if TYPE_CHECKING:
    from .scenario import Scenario

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AccessPoint:
    id: str
    position: tuple[float, float]  # meters
    channel: int = 1

    def __post_init__(self):
        if self.channel <= 0:
            raise ValueError(f"access point {self.id}: channel must be positive")


@dataclass(frozen=True)
class Station:
    id: str
    position: tuple[float, float]  # meters
    traffic: str | None = None  # profile name
    offered_kbps: float = 0.0

    def __post_init__(self):
        if self.offered_kbps < 0:
            raise ValueError(f"station {self.id}: offered_kbps must be non-negative")


class HandoffReason(str, Enum):
    LOAD_BALANCE = "load-balance"


@dataclass(frozen=True)
class Handoff:
    """A reassociation decision, with both SNRs read at decision time."""

    station: str
    from_ap: str
    to_ap: str
    snr_old: float
    snr_new: float
    reason: HandoffReason = HandoffReason.LOAD_BALANCE

    def __post_init__(self):
        if self.from_ap == self.to_ap:
            raise ValueError(f"handoff of {self.station} must change access point")


def _sum_loads(offered, association, ap) -> float:
    return math.fsum(
        offered[station]
        for station in sorted(association)
        if association[station] == ap
    )


@dataclass(frozen=True)
class NetworkState:
    """Association map plus a cache of per-AP loads derived from it."""

    access_points: tuple[str, ...]
    offered: dict[str, float]
    association: dict[str, str] = field(default_factory=dict)
    loads: dict[str, float] = field(default_factory=dict)

    @classmethod
    def empty(cls, scenario: Scenario) -> NetworkState:
        return cls.build(
            access_points=[ap.id for ap in scenario.access_points],
            offered={sta.id: sta.offered_kbps for sta in scenario.stations},
            association={},
        )

    @classmethod
    def build(cls, access_points, offered, association) -> NetworkState:
        access_points = tuple(sorted(access_points))
        offered = dict(offered)
        association = dict(association)
        for station, ap in association.items():
            if station not in offered:
                raise UnknownEntityError(f"unknown station '{station}'")
            if ap not in access_points:
                raise UnknownEntityError(f"station '{station}' associated to unknown AP '{ap}'")
        loads = {ap: _sum_loads(offered, association, ap) for ap in access_points}
        return cls(access_points, offered, association, loads)

    def recomputed_loads(self) -> dict[str, float]:
        return {ap: _sum_loads(self.offered, self.association, ap) for ap in self.access_points}

    def stations_on(self, ap: str) -> list[str]:
        return sorted(sta for sta, cur in self.association.items() if cur == ap)

    def scaled(self, factor: float) -> NetworkState:
        """Same association with every offered load multiplied by ``factor``."""
        return NetworkState.build(
            self.access_points,
            {sta: rate * factor for sta, rate in self.offered.items()},
            self.association,
        )


def ap_load(state: NetworkState, ap: str) -> float:
    try:
        return state.loads[ap]
    except KeyError:
        raise UnknownEntityError(f"unknown access point '{ap}'")


def associate(state: NetworkState, station: str, ap: str) -> NetworkState:
    """Move ``station`` to ``ap``; only the two affected load entries are recomputed."""
    if station not in state.offered:
        raise UnknownEntityError(f"unknown station '{station}'")
    if ap not in state.loads:
        raise UnknownEntityError(f"unknown access point '{ap}'")

    previous = state.association.get(station)
    if previous == ap:
        return state

    association = dict(state.association)
    association[station] = ap
    loads = dict(state.loads)
    loads[ap] = _sum_loads(state.offered, association, ap)
    if previous is not None:
        loads[previous] = _sum_loads(state.offered, association, previous)

    logger.debug(f"associate {station}: {previous} -> {ap}")
    return NetworkState(state.access_points, state.offered, association, loads)


def audible_aps(station: str, scenario: Scenario, threshold: float) -> list[tuple[str, float]]:
    """APs heard at or above ``threshold`` dB, strongest first, ties by AP id."""
    scenario.station(station)
    heard = []
    for access_point in scenario.access_points:
        snr = snr_db(access_point.id, station, scenario)
        if snr >= threshold:
            heard.append((access_point.id, snr))
    heard.sort(key=lambda item: (-item[1], item[0]))
    return heard
