"""
The Scenario value: topology, radio constants, traffic profiles, policy and
simulation settings of one experiment cell.

Scenarios are immutable. Sweeps derive per-cell variants with the ``with_*``
helpers instead of mutating a shared instance, so the same base scenario can
be shipped to many workers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

from .errors import UnknownEntityError
from .macsim import SimConfig
from .metrics import PsnrParams
from .network import AccessPoint, Station
from .policies import PolicyKind, PolicyParams
from .radio import DEFAULT_RATE_TABLE, PerModel, RadioParams, RateTable
from .traffic import CbrProfile, VideoProfile

logger = logging.getLogger(__name__)

TrafficProfile = VideoProfile | CbrProfile


@dataclass(frozen=True)
class Scenario:
    name: str
    access_points: tuple[AccessPoint, ...]
    stations: tuple[Station, ...]
    profiles: dict[str, TrafficProfile] = field(default_factory=dict)
    radio: RadioParams = field(default_factory=RadioParams)
    rate_table: RateTable = DEFAULT_RATE_TABLE
    rate_table_name: str | None = "80211b"
    per_model: PerModel | None = None
    assignments: dict[str, str] = field(default_factory=dict)
    snr_overrides: dict[tuple[str, str], float] = field(default_factory=dict)
    policy_kind: PolicyKind = PolicyKind.STRONGEST_SNR
    policy: PolicyParams = field(default_factory=PolicyParams)
    sim: SimConfig = field(default_factory=lambda: SimConfig(duration=60.0, seed=1))
    psnr: PsnrParams = field(default_factory=PsnrParams)
    description: str = ""

    def __post_init__(self):
        if self.per_model is None:
            object.__setattr__(self, "per_model", PerModel.for_table(self.rate_table))

    def access_point(self, ap: str) -> AccessPoint:
        for access_point in self.access_points:
            if access_point.id == ap:
                return access_point
        raise UnknownEntityError(f"unknown access point '{ap}'")

    def station(self, station: str) -> Station:
        for candidate in self.stations:
            if candidate.id == station:
                return candidate
        raise UnknownEntityError(f"unknown station '{station}'")

    def profile_for(self, station: str) -> TrafficProfile | None:
        sink = self.station(station)
        if sink.traffic is None:
            return None
        try:
            return self.profiles[sink.traffic]
        except KeyError:
            raise UnknownEntityError(f"station '{station}' uses unknown profile '{sink.traffic}'")

    def video_stations(self) -> list[str]:
        return sorted(
            sta.id for sta in self.stations if isinstance(self.profile_for(sta.id), VideoProfile)
        )

    def video_station(self) -> str:
        """The single video sink; experiments measure QoS at this station."""
        sinks = self.video_stations()
        if not sinks:
            raise UnknownEntityError(f"scenario '{self.name}' has no video station")
        return sinks[0]

    def cbr_stations(self) -> list[str]:
        return sorted(
            sta.id for sta in self.stations if isinstance(self.profile_for(sta.id), CbrProfile)
        )

    def with_snr_override(self, ap: str, station: str, snr: float) -> Scenario:
        self.access_point(ap)
        self.station(station)
        overrides = dict(self.snr_overrides)
        overrides[(ap, station)] = float(snr)
        return replace(self, snr_overrides=overrides)

    def with_background_load(self, total_kbps: float) -> Scenario:
        """Split ``total_kbps`` evenly over the CBR sinks, each getting its own profile."""
        sinks = self.cbr_stations()
        if not sinks:
            raise UnknownEntityError(f"scenario '{self.name}' has no CBR station to carry load")

        share = total_kbps / len(sinks)
        profiles = dict(self.profiles)
        stations = []
        for sta in self.stations:
            if sta.id in sinks:
                base = self.profiles[sta.traffic]
                key = f"{sta.traffic.split('@')[0]}@{sta.id}"
                profiles[key] = CbrProfile(rate=share, packet=base.packet)
                sta = replace(sta, traffic=key, offered_kbps=share)
            stations.append(sta)

        logger.debug(f"{self.name}: background {total_kbps} kbps over {len(sinks)} sinks")
        return replace(self, profiles=profiles, stations=tuple(stations))

    def with_policy(self, kind: PolicyKind | None = None, **params) -> Scenario:
        return replace(
            self,
            policy_kind=self.policy_kind if kind is None else kind,
            policy=replace(self.policy, **params).for_kind(self.policy_kind if kind is None else kind),
        )

    def with_sim(self, **changes) -> Scenario:
        return replace(self, sim=replace(self.sim, **changes))

    def offered_kbps(self) -> dict[str, float]:
        return {sta.id: sta.offered_kbps for sta in self.stations}
