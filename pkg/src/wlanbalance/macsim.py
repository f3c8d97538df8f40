"""
Discrete-event downlink MAC.

Each access point keeps one FIFO per destination station and hands out
transmit opportunities round-robin over the stations that have backlog. A
transmit opportunity serves the head-of-line packet until it succeeds or the
retry limit is exhausted; every attempt costs ``bits / phy_rate`` plus a fixed
per-packet overhead of that AP's airtime. This equal-chances, unequal-airtime
sharing is what produces the 802.11 rate anomaly.

Time is kept in integer microseconds. Loss draws come from a Philox stream
keyed by the run seed and positioned by the packet identity, so a packet sees
the same draws whatever else is in the run.
"""

from __future__ import annotations

import hashlib
import heapq
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from .errors import ConfigurationError
from .network import Handoff, NetworkState
from .radio import packet_error_prob, snr_db
from .traffic import CbrProfile, VideoProfile, generate_cbr, video_packets

if TYPE_CHECKING:
    from .scenario import Scenario

logger = logging.getLogger(__name__)

US_PER_S = 1_000_000

# event kinds, in tie-break order: a completed transmission frees its slot
# before a simultaneous arrival is admitted
TX_END = 0
ARRIVAL = 1


@dataclass(frozen=True)
class SimConfig:
    duration: float  # seconds
    seed: int
    queue_capacity: int = 500  # packets per AP, the one on air included
    retry_limit: int = 4
    per_packet_overhead: float = 0.0008  # seconds

    def __post_init__(self):
        if not self.duration > 0:
            raise ConfigurationError(f"duration must be positive, got {self.duration}")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.queue_capacity < 1:
            raise ConfigurationError("queue_capacity must be at least 1")
        if self.retry_limit < 0:
            raise ConfigurationError("retry_limit must be non-negative")
        if self.per_packet_overhead < 0:
            raise ConfigurationError("per_packet_overhead must be non-negative")


class PacketOutcome(str, Enum):
    DELIVERED = "delivered"
    DROPPED_QUEUE_FULL = "dropped-queue-full"
    DROPPED_RETRY_LIMIT = "dropped-retry-limit"
    RESIDUAL_IN_QUEUE = "residual-in-queue"


@dataclass(frozen=True)
class PacketRecord:
    station: str
    frame_id: int | None
    packet_id: int
    bits: int
    birth: float  # seconds
    enqueue: float  # seconds
    outcome: PacketOutcome
    delivered_at: float | None = None  # seconds
    attempts: int = 0

    @property
    def delivered(self) -> bool:
        return self.outcome is PacketOutcome.DELIVERED

    @property
    def delay(self) -> float:
        """End-to-end delay in seconds; only defined for delivered packets."""
        return self.delivered_at - self.birth


@dataclass(frozen=True)
class SimCounters:
    generated: int = 0
    delivered: int = 0
    dropped_queue: int = 0
    dropped_retry: int = 0
    residual: int = 0

    @property
    def conserved(self) -> bool:
        return self.generated == (
            self.delivered + self.dropped_queue + self.dropped_retry + self.residual
        )


@dataclass(frozen=True)
class SimResult:
    records: tuple[PacketRecord, ...]
    handoffs: tuple[Handoff, ...]
    config: SimConfig
    counters: SimCounters
    association: dict[str, str] = field(default_factory=dict)

    def for_station(self, station: str) -> list[PacketRecord]:
        return [record for record in self.records if record.station == station]


@dataclass
class _Pending:
    station: str
    frame_id: int | None
    packet_id: int
    bits: int
    birth_us: int

    @property
    def key(self) -> tuple:
        return (self.station, -1 if self.frame_id is None else self.frame_id, self.packet_id)


@dataclass
class _ApQueue:
    stations: list[str]
    backlog: dict[str, deque] = field(default_factory=dict)
    waiting: int = 0
    busy: bool = False
    last_served: str | None = None
    in_service: _Pending | None = None

    def __post_init__(self):
        self.backlog = {station: deque() for station in self.stations}

    def next_station(self, rates: dict[str, float]) -> str | None:
        ready = [sta for sta in self.stations if self.backlog[sta] and rates[sta] > 0]
        if not ready:
            return None
        if self.last_served is not None:
            for station in ready:
                if station > self.last_served:
                    return station
        return ready[0]


def loss_draws(seed: int, identity: tuple, count: int) -> np.ndarray:
    """``count`` uniforms in [0, 1) for one packet, independent of run order."""
    digest = hashlib.blake2b(repr(identity).encode(), digest_size=8).digest()
    stream = np.random.Philox(key=seed, counter=int.from_bytes(digest, "big") << 64)
    raw = stream.random_raw(count)
    return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53


def _traffic(scenario: Scenario, duration: float) -> list[_Pending]:
    pending = []
    for station in sorted(sta.id for sta in scenario.stations):
        profile = scenario.profile_for(station)
        if isinstance(profile, VideoProfile):
            packets = video_packets(profile, duration, station)
        elif isinstance(profile, CbrProfile):
            packets = generate_cbr(profile, duration, station)
        else:
            continue
        for packet in packets:
            birth_us = round(packet.birth * US_PER_S)
            pending.append(_Pending(station, packet.frame_id, packet.id, packet.size, birth_us))
    return pending


def _check_associated(scenario: Scenario, state: NetworkState) -> None:
    for station in sorted(sta.id for sta in scenario.stations):
        if scenario.profile_for(station) is None:
            continue
        if station not in state.association:
            raise ConfigurationError(f"traffic sink '{station}' is not associated to any AP")


def run(
    scenario: Scenario,
    state: NetworkState,
    config: SimConfig,
    handoffs: tuple[Handoff, ...] | list[Handoff] = (),
) -> SimResult:
    """Simulate ``config.duration`` seconds of downlink traffic on ``state``."""
    _check_associated(scenario, state)

    duration_us = round(config.duration * US_PER_S)
    overhead_us = round(config.per_packet_overhead * US_PER_S)
    attempts_max = config.retry_limit + 1

    rates: dict[str, float] = {}
    tiers: dict[str, int | None] = {}
    queues: dict[str, _ApQueue] = {}
    for ap in state.access_points:
        queues[ap] = _ApQueue(
            [sta for sta in state.stations_on(ap) if scenario.profile_for(sta) is not None]
        )
    for station, ap in state.association.items():
        snr = snr_db(ap, station, scenario)
        tier = scenario.rate_table.tier_index(snr)
        tiers[station] = tier
        rates[station] = 0.0 if tier is None else scenario.rate_table.tiers[tier].phy_rate_kbps

    per_cache: dict[tuple[str, int], float] = {}

    def error_prob(station: str, bits: int) -> float:
        key = (station, bits)
        if key not in per_cache:
            ap = state.association[station]
            per_cache[key] = packet_error_prob(
                snr_db(ap, station, scenario), tiers[station], bits, scenario.per_model
            )
        return per_cache[key]

    events = []
    traffic = _traffic(scenario, config.duration)
    for index, packet in enumerate(traffic):
        ap = state.association[packet.station]
        events.append((packet.birth_us, ARRIVAL, ap, *packet.key, index))
    heapq.heapify(events)

    records: list[PacketRecord] = []

    def record(packet: _Pending, outcome: PacketOutcome, done_us=None, attempts=0):
        birth = packet.birth_us / US_PER_S
        records.append(
            PacketRecord(
                station=packet.station,
                frame_id=packet.frame_id,
                packet_id=packet.packet_id,
                bits=packet.bits,
                birth=birth,
                enqueue=birth,
                outcome=outcome,
                delivered_at=None if done_us is None else done_us / US_PER_S,
                attempts=attempts,
            )
        )

    outcome_of: dict[tuple, tuple[PacketOutcome, int]] = {}

    def start_service(ap: str, now: int) -> None:
        queue = queues[ap]
        station = queue.next_station(rates)
        if station is None:
            queue.busy = False
            return

        packet = queue.backlog[station].popleft()
        queue.waiting -= 1
        queue.last_served = station
        queue.busy = True
        queue.in_service = packet

        per = error_prob(station, packet.bits)
        draws = loss_draws(config.seed, packet.key, attempts_max)
        successes = np.flatnonzero(draws >= per)
        if successes.size:
            attempts, outcome = int(successes[0]) + 1, PacketOutcome.DELIVERED
        else:
            attempts, outcome = attempts_max, PacketOutcome.DROPPED_RETRY_LIMIT
        outcome_of[packet.key] = (outcome, attempts)

        airtime = math.ceil(packet.bits * 1000 / rates[station]) + overhead_us
        heapq.heappush(events, (now + attempts * airtime, TX_END, ap, *packet.key, -1))

    while events and events[0][0] <= duration_us:
        now, kind, ap, *_rest, index = heapq.heappop(events)
        queue = queues[ap]

        if kind == TX_END:
            packet = queue.in_service
            outcome, attempts = outcome_of.pop(packet.key)
            record(packet, outcome, now if outcome is PacketOutcome.DELIVERED else None, attempts)
            queue.in_service = None
            start_service(ap, now)
            continue

        packet = traffic[index]
        if queue.waiting + (1 if queue.busy else 0) >= config.queue_capacity:
            record(packet, PacketOutcome.DROPPED_QUEUE_FULL)
            continue
        queue.backlog[packet.station].append(packet)
        queue.waiting += 1
        if not queue.busy:
            start_service(ap, now)

    for ap in sorted(queues):
        queue = queues[ap]
        if queue.in_service is not None:
            record(queue.in_service, PacketOutcome.RESIDUAL_IN_QUEUE)
        for station in queue.stations:
            for packet in queue.backlog[station]:
                record(packet, PacketOutcome.RESIDUAL_IN_QUEUE)
    # arrivals rounded past the horizon never reached a queue
    for _t, kind, _ap, *_rest, index in events:
        if kind == ARRIVAL:
            record(traffic[index], PacketOutcome.RESIDUAL_IN_QUEUE)

    records.sort(key=lambda r: (r.station, -1 if r.frame_id is None else r.frame_id, r.packet_id))
    counts = {outcome: 0 for outcome in PacketOutcome}
    for item in records:
        counts[item.outcome] += 1
    counters = SimCounters(
        generated=len(traffic),
        delivered=counts[PacketOutcome.DELIVERED],
        dropped_queue=counts[PacketOutcome.DROPPED_QUEUE_FULL],
        dropped_retry=counts[PacketOutcome.DROPPED_RETRY_LIMIT],
        residual=counts[PacketOutcome.RESIDUAL_IN_QUEUE],
    )
    logger.debug(
        f"{scenario.name} seed={config.seed}: generated={counters.generated} "
        f"delivered={counters.delivered} dropped_queue={counters.dropped_queue} "
        f"dropped_retry={counters.dropped_retry} residual={counters.residual}"
    )
    return SimResult(
        records=tuple(records),
        handoffs=tuple(handoffs),
        config=config,
        counters=counters,
        association=dict(state.association),
    )
