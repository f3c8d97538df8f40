"""
Downlink traffic sources: a deterministic MPEG-4-like video camera and
constant-bit-rate background flows, plus MTU packetization.
"""

import math
from dataclasses import dataclass
from enum import Enum


class FrameKind(str, Enum):
    I = "I"  # noqa: E741
    P = "P"


@dataclass(frozen=True)
class VideoProfile:
    """GOP of ``gop_length`` frames: one I-frame ``i_frame_ratio`` times a P-frame."""

    fps: float = 25.0
    mean_frame: int = 23400  # bits
    gop_length: int = 10
    i_frame_ratio: float = 4.0
    mtu: int = 1500  # bytes

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError("video fps must be positive")
        if self.mean_frame <= 0:
            raise ValueError("video mean_frame must be positive")
        if self.gop_length < 1:
            raise ValueError("video gop_length must be at least 1")
        if self.i_frame_ratio < 1:
            raise ValueError("video i_frame_ratio must be at least 1")
        if self.mtu < 100:
            raise ValueError("video mtu must be at least 100 bytes")

    @property
    def p_frame_bits(self) -> int:
        # (k + N - 1) * s = N * mean
        n = self.gop_length
        return round(n * self.mean_frame / (self.i_frame_ratio + n - 1))

    @property
    def i_frame_bits(self) -> int:
        return round(self.i_frame_ratio * self.p_frame_bits)

    @property
    def nominal_kbps(self) -> float:
        return self.fps * self.mean_frame / 1000.0


@dataclass(frozen=True)
class CbrProfile:
    rate: float  # kbps
    packet: int = 1500  # bytes

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("CBR rate must be non-negative")
        if self.packet < 100:
            raise ValueError("CBR packet must be at least 100 bytes")

    @property
    def nominal_kbps(self) -> float:
        return self.rate


@dataclass(frozen=True)
class Frame:
    id: int
    birth: float  # seconds
    size: int  # bits
    kind: FrameKind


@dataclass(frozen=True)
class Packet:
    id: int
    frame_id: int | None
    birth: float  # seconds
    size: int  # bits
    dst_station: str


def _settle(value: float) -> float:
    # guards floor/ceil against representation noise such as 1500.0000000000002
    return round(value, 9)


def generate_video(profile: VideoProfile, duration: float) -> list[Frame]:
    if duration <= 0:
        raise ValueError(f"duration must be positive, got {duration}")

    count = math.floor(_settle(duration * profile.fps))
    p_bits, i_bits = profile.p_frame_bits, profile.i_frame_bits
    frames = []
    for index in range(count):
        is_intra = index % profile.gop_length == 0
        frames.append(
            Frame(
                id=index,
                birth=index / profile.fps,
                size=i_bits if is_intra else p_bits,
                kind=FrameKind.I if is_intra else FrameKind.P,
            )
        )
    return frames


def packetize(frame: Frame, mtu: int, dst_station: str = "") -> list[Packet]:
    """Split a frame into MTU-sized fragments; only the last one may be short."""
    if mtu < 100:
        raise ValueError(f"mtu must be at least 100 bytes, got {mtu}")

    chunk = mtu * 8
    full, remainder = divmod(frame.size, chunk)
    sizes = [chunk] * full + ([remainder] if remainder else [])
    return [
        Packet(id=index, frame_id=frame.id, birth=frame.birth, size=size, dst_station=dst_station)
        for index, size in enumerate(sizes)
    ]


def generate_cbr(profile: CbrProfile, duration: float, dst_station: str = "") -> list[Packet]:
    if duration <= 0:
        raise ValueError(f"duration must be positive, got {duration}")
    if profile.rate == 0:
        return []

    bits = profile.packet * 8
    spacing = bits / (profile.rate * 1000.0)
    count = math.ceil(_settle(duration / spacing))
    return [
        Packet(id=index, frame_id=None, birth=index * spacing, size=bits, dst_station=dst_station)
        for index in range(count)
    ]


def video_packets(profile: VideoProfile, duration: float, dst_station: str) -> list[Packet]:
    packets = []
    for frame in generate_video(profile, duration):
        packets.extend(packetize(frame, profile.mtu, dst_station))
    return packets
