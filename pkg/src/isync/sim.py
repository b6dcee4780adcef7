"""Discrete-event core: event queue, seeded randomness and the abstract radio channel.

All times are integer nanoseconds of reference (true) time. The base station
holds the reference clock; UE clocks are modelled in :mod:`isync.clock`.
"""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional

import numpy as np

SimTime = int
NodeId = int

BS_NODE: NodeId = -1


class Direction(str, enum.Enum):
    DL = "DL"
    UL = "UL"


class SchedulingError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Event:
    time: SimTime
    seq: int
    node: NodeId = field(compare=False)
    payload: Any = field(compare=False)


class EventQueue:
    """Min-queue of events keyed by ``(time, insertion sequence)``.

    Events scheduled for the same instant pop in insertion order, which makes
    a run fully reproducible for a fixed seed and scenario.
    """

    def __init__(self, start: SimTime = 0):
        self._heap: list[Event] = []
        self._seq = 0
        self.now: SimTime = start

    def __len__(self) -> int:
        return len(self._heap)

    def schedule(self, at: SimTime, node: NodeId, payload: Any) -> int:
        at = int(at)
        if at < self.now:
            raise SchedulingError(f"cannot schedule at t={at} before now={self.now}")
        seq = self._seq
        self._seq += 1
        heapq.heappush(self._heap, Event(at, seq, node, payload))
        return seq

    def pop(self) -> Event:
        ev = heapq.heappop(self._heap)
        self.now = ev.time
        return ev

    def peek_time(self) -> Optional[SimTime]:
        return self._heap[0].time if self._heap else None

    def drain(self, until: Optional[SimTime] = None) -> Iterator[Event]:
        while self._heap and (until is None or self._heap[0].time <= until):
            yield self.pop()


def schedule(queue: EventQueue, at: SimTime, node: NodeId, payload: Any) -> int:
    return queue.schedule(at, node, payload)


def make_rng(*key: int) -> np.random.Generator:
    """Independent generator for a tuple key such as ``(seed, ue_id, stream)``."""
    return np.random.default_rng([int(k) & 0xFFFFFFFF for k in key])


# jitter descriptors: ("none",), ("uniform", low_ns, high_ns), ("normal", mean_ns, sigma_ns)
JITTER_KINDS = ("none", "uniform", "normal")


@dataclass(frozen=True)
class ChannelModel:
    dl_delay_base: int = 5_000
    ul_delay_base: int = 5_000
    jitter: tuple = ("none",)
    loss_prob: float = 0.0
    asymmetry: int = 0
    ns_per_byte: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ValueError("loss_prob must lie in [0, 1]")
        if self.dl_delay_base <= 0 or self.ul_delay_base + self.asymmetry <= 0:
            raise ValueError("base delays must be positive")
        if self.jitter[0] not in JITTER_KINDS:
            raise ValueError(f"unknown jitter distribution {self.jitter[0]!r}")

    def base(self, direction: Direction) -> int:
        if direction == Direction.DL:
            return self.dl_delay_base
        return self.ul_delay_base + self.asymmetry

    def jitter_sample(self, rng: np.random.Generator) -> float:
        kind = self.jitter[0]
        if kind == "none":
            return 0.0
        if kind == "uniform":
            return float(rng.uniform(self.jitter[1], self.jitter[2]))
        # truncated at zero
        mean, sigma = self.jitter[1], self.jitter[2]
        while True:
            x = float(rng.normal(mean, sigma))
            if x >= 0.0:
                return x


LOST = None


def transmit(channel: ChannelModel, direction: Direction, size: int, rng: np.random.Generator) -> Optional[int]:
    """One-way delay in ns for a ``size``-byte transmission, or ``None`` if lost.

    The loss draw is taken before the jitter draw, and only when
    ``0 < loss_prob < 1``, so a lossless channel consumes no randomness for it.
    """
    if size <= 0:
        raise ValueError("size must be positive")
    if channel.loss_prob >= 1.0:
        return LOST
    if channel.loss_prob > 0.0 and rng.random() < channel.loss_prob:
        return LOST
    delay = channel.base(direction) + size * channel.ns_per_byte + channel.jitter_sample(rng)
    return max(1, int(round(delay)))
