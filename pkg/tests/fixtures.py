"""
Test fixtures shared across the simulator, policy and harness tests.
Provides small hand-built scenarios and access to the shipped scenario files.
"""

import copy
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

from wlanbalance.harness.loader import load_scenario
from wlanbalance.macsim import PacketOutcome, PacketRecord, SimConfig
from wlanbalance.network import AccessPoint, NetworkState, Station
from wlanbalance.policies import PolicyKind, PolicyParams
from wlanbalance.radio import DEFAULT_RATE_TABLE, PerModel, RateTable
from wlanbalance.scenario import Scenario
from wlanbalance.traffic import CbrProfile, VideoProfile

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


class TestFixtures:
    """Centralized builders for scenarios, states and packet records"""

    __test__ = False

    @staticmethod
    def minimal_document() -> Dict[str, Any]:
        """One AP, one video station pinned at 50 dB"""
        return copy.deepcopy(
            {
                "name": "minimal",
                "access_points": [{"id": "ap1", "position": [0, 0]}],
                "profiles": {"camera": {"type": "video"}},
                "stations": [{"id": "cam", "position": [3, 4], "traffic": "camera"}],
                "snr_overrides": [{"ap": "ap1", "station": "cam", "snr_db": 50}],
                "sim": {"duration": 10, "seed": 1},
            }
        )

    @staticmethod
    def shipped(name: str) -> Scenario:
        return load_scenario(SCENARIO_DIR / f"{name}.json")

    @staticmethod
    def single_cell(
        links: Dict[str, float],
        rates: Dict[str, float],
        duration: float = 10.0,
        seed: int = 1,
        queue_capacity: int = 500,
        video: Iterable[str] = (),
        per_model: Optional[PerModel] = None,
        table: RateTable = DEFAULT_RATE_TABLE,
    ) -> Scenario:
        """One AP; each station gets its own CBR profile (or the default video profile)."""
        video = set(video)
        profiles, stations = {}, []
        for index, station in enumerate(sorted(links)):
            if station in video:
                profile = VideoProfile()
            else:
                profile = CbrProfile(rate=rates[station])
            profiles[f"p-{station}"] = profile
            stations.append(
                Station(station, (float(index + 1), 0.0), f"p-{station}", profile.nominal_kbps)
            )
        return Scenario(
            name="single-cell",
            access_points=(AccessPoint("ap1", (0.0, 0.0)),),
            stations=tuple(stations),
            profiles=profiles,
            rate_table=table,
            per_model=per_model,
            assignments={station: "ap1" for station in links},
            snr_overrides={("ap1", station): float(snr) for station, snr in links.items()},
            sim=SimConfig(duration=duration, seed=seed, queue_capacity=queue_capacity),
        )

    @staticmethod
    def associated(scenario: Scenario) -> NetworkState:
        return NetworkState.build(
            [ap.id for ap in scenario.access_points],
            scenario.offered_kbps(),
            scenario.assignments,
        )

    @staticmethod
    def multi_ap(
        snr: Dict[str, Dict[str, float]],
        offered: Dict[str, float],
        association: Dict[str, str],
        kind: PolicyKind = PolicyKind.LBA,
        beta: float = 0.2,
        assoc_threshold: float = 4.0,
        guard_inclusive: bool = True,
        max_handoffs: Optional[int] = None,
    ):
        """Scenario plus state for policy tests; ``snr[station][ap]`` pins every link."""
        ap_ids = sorted({ap for links in snr.values() for ap in links})
        scenario = Scenario(
            name="multi-ap",
            access_points=tuple(
                AccessPoint(ap, (10.0 * i, 0.0)) for i, ap in enumerate(ap_ids)
            ),
            stations=tuple(
                Station(sta, (5.0, 5.0 + i), None, offered[sta])
                for i, sta in enumerate(sorted(offered))
            ),
            assignments=dict(association),
            snr_overrides={
                (ap, sta): float(value)
                for sta, links in snr.items()
                for ap, value in links.items()
            },
            policy_kind=kind,
            policy=PolicyParams(
                beta=beta,
                assoc_threshold=assoc_threshold,
                guard_inclusive=guard_inclusive,
                max_handoffs=max_handoffs,
            ).for_kind(kind),
        )
        state = NetworkState.build(ap_ids, offered, association)
        return scenario, state

    @staticmethod
    def record(
        delay_ms: Optional[float],
        birth: float = 0.0,
        bits: int = 12000,
        frame_id: Optional[int] = None,
        packet_id: int = 0,
        station: str = "s1",
        outcome: Optional[PacketOutcome] = None,
    ) -> PacketRecord:
        """A packet record; ``delay_ms=None`` makes a queue drop."""
        if delay_ms is None:
            return PacketRecord(
                station, frame_id, packet_id, bits, birth, birth,
                outcome or PacketOutcome.DROPPED_QUEUE_FULL,
            )
        return PacketRecord(
            station, frame_id, packet_id, bits, birth, birth,
            PacketOutcome.DELIVERED, birth + delay_ms / 1000.0, 1,
        )
