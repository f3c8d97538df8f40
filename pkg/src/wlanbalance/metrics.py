"""
QoS panel computed from a packet trace.

Definitions used throughout:

* packet jitter is the RFC 3550 interarrival estimator
  ``J += (|T_i - T_{i-1}| - J) / 16`` over deliveries in delivery order;
* frame jitter is the population standard deviation of complete-frame delays;
* a frame is complete when every one of its packets was delivered, and it is
  delivered when its last packet is;
* the PSNR figure is a linear proxy in on-time frame delivery, not a
  pixel-domain measurement.

All delays and jitters are reported in milliseconds.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .errors import UndefinedStatisticError
from .macsim import PacketRecord, SimResult
from .traffic import VideoProfile

if TYPE_CHECKING:
    from .scenario import Scenario

logger = logging.getLogger(__name__)

MS_PER_S = 1000.0
JITTER_GAIN = 16


@dataclass(frozen=True)
class PsnrParams:
    psnr_max: float = 40.0  # dB
    psnr_min: float = 10.0  # dB
    playout_deadline: float = 400.0  # ms

    def __post_init__(self):
        if not self.psnr_max > self.psnr_min >= 0:
            raise ValueError(
                f"PSNR bounds must satisfy psnr_max > psnr_min >= 0, "
                f"got {self.psnr_max} / {self.psnr_min}"
            )
        if not self.playout_deadline > 0:
            raise ValueError(f"playout_deadline must be positive, got {self.playout_deadline}")


@dataclass(frozen=True)
class FrameStats:
    frame_rate: float  # fps
    frame_delay_mean: float  # ms
    frame_jitter: float  # ms
    complete_frames: int = 0
    delays: tuple[float, ...] = field(default=(), repr=False)  # ms, frame id order

    @property
    def empty(self) -> bool:
        return self.complete_frames == 0

    def on_time_ratio(self, deadline_ms: float) -> float:
        if self.empty:
            return 0.0
        return sum(1 for delay in self.delays if delay <= deadline_ms) / self.complete_frames


@dataclass(frozen=True)
class QosReport:
    station: str
    offered_kbps: float
    throughput: float  # kbps
    delay_mean: float  # ms
    delay_p95: float  # ms
    packet_jitter: float  # ms
    loss_ratio: float
    frame_jitter: float | None = None  # ms, video sinks only
    frame_rate: float | None = None  # fps
    frame_delay_mean: float | None = None  # ms
    psnr: float | None = None  # dB
    no_deliveries: bool = False
    jitter_undefined: bool = False
    no_complete_frames: bool = False


def _delivered(records: Iterable[PacketRecord]) -> list[PacketRecord]:
    return [record for record in records if record.delivered]


def throughput_kbps(records: Iterable[PacketRecord], duration: float) -> float:
    if not duration > 0:
        raise ValueError(f"duration must be positive, got {duration}")
    return math.fsum(record.bits for record in _delivered(records)) / duration / 1000.0


def delay_stats(records: Iterable[PacketRecord]) -> tuple[float, float]:
    """Mean and nearest-rank 95th percentile of packet delay, in ms."""
    delays = sorted(record.delay * MS_PER_S for record in _delivered(records))
    if not delays:
        raise UndefinedStatisticError("delay is undefined without any delivered packet")
    rank = math.ceil(0.95 * len(delays))
    return float(np.mean(delays)), delays[rank - 1]


def packet_jitter_ms(records: Iterable[PacketRecord]) -> float:
    deliveries = sorted(
        _delivered(records),
        key=lambda r: (r.delivered_at, -1 if r.frame_id is None else r.frame_id, r.packet_id),
    )
    if len(deliveries) < 2:
        raise UndefinedStatisticError("packet jitter needs at least two delivered packets")

    jitter = 0.0
    previous = deliveries[0].delay * MS_PER_S
    for record in deliveries[1:]:
        transit = record.delay * MS_PER_S
        jitter += (abs(transit - previous) - jitter) / JITTER_GAIN
        previous = transit
    return jitter


def frame_stats(
    records: Iterable[PacketRecord], profile: VideoProfile, duration: float
) -> FrameStats:
    if not duration > 0:
        raise ValueError(f"duration must be positive, got {duration}")

    frames: dict[int, list[PacketRecord]] = defaultdict(list)
    for record in records:
        if record.frame_id is not None:
            frames[record.frame_id].append(record)

    delays = []
    for frame_id in sorted(frames):
        fragments = frames[frame_id]
        if not all(fragment.delivered for fragment in fragments):
            continue
        arrival = max(fragment.delivered_at for fragment in fragments)
        birth = min(fragment.birth for fragment in fragments)
        delays.append((arrival - birth) * MS_PER_S)

    if not delays:
        return FrameStats(frame_rate=0.0, frame_delay_mean=0.0, frame_jitter=0.0)
    return FrameStats(
        frame_rate=min(len(delays) / duration, profile.fps),
        frame_delay_mean=float(np.mean(delays)),
        frame_jitter=float(np.std(delays)),
        complete_frames=len(delays),
        delays=tuple(delays),
    )


def loss_ratio(records: Iterable[PacketRecord]) -> float:
    records = list(records)
    if not records:
        raise UndefinedStatisticError("loss ratio is undefined without any generated packet")
    lost = sum(1 for record in records if not record.delivered)
    return lost / len(records)


def psnr_proxy(
    frame_rate: float, on_time_ratio: float, source_fps: float, params: PsnrParams
) -> float:
    if not source_fps > 0:
        raise ValueError(f"source_fps must be positive, got {source_fps}")
    quality = min(1.0, max(0.0, frame_rate / source_fps)) * min(1.0, max(0.0, on_time_ratio))
    return params.psnr_min + (params.psnr_max - params.psnr_min) * quality


def qos_report(result: SimResult, scenario: Scenario, station: str) -> QosReport:
    """Full panel for one station; undefined statistics are reported as 0 and flagged."""
    records = result.for_station(station)
    duration = result.config.duration
    offered = scenario.station(station).offered_kbps

    delivered = _delivered(records)
    no_deliveries = not delivered
    delay_mean, delay_p95 = (0.0, 0.0) if no_deliveries else delay_stats(delivered)
    jitter_undefined = len(delivered) < 2
    jitter = 0.0 if jitter_undefined else packet_jitter_ms(delivered)

    video = {}
    profile = scenario.profile_for(station)
    if isinstance(profile, VideoProfile):
        frames = frame_stats(records, profile, duration)
        on_time = frames.on_time_ratio(scenario.psnr.playout_deadline)
        video = dict(
            frame_jitter=frames.frame_jitter,
            frame_rate=frames.frame_rate,
            frame_delay_mean=frames.frame_delay_mean,
            psnr=psnr_proxy(frames.frame_rate, on_time, profile.fps, scenario.psnr),
            no_complete_frames=frames.empty,
        )

    return QosReport(
        station=station,
        offered_kbps=offered,
        throughput=throughput_kbps(records, duration),
        delay_mean=delay_mean,
        delay_p95=delay_p95,
        packet_jitter=jitter,
        loss_ratio=loss_ratio(records) if records else 0.0,
        no_deliveries=no_deliveries,
        jitter_undefined=jitter_undefined,
        **video,
    )
