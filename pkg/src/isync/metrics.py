"""Precision/timeliness/satisfaction metrics, byte accounting and integration gain."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Iterable, Optional, Sequence

import numpy as np


def percentile(values: Sequence[float], q: float) -> float:
    """Nearest-rank percentile; ``inf`` entries (misses) are allowed."""
    if len(values) == 0:
        raise ValueError("percentile of an empty window")
    xs = np.sort(np.asarray(values, dtype=float))
    k = max(1, math.ceil(q / 100.0 * len(xs)))
    return float(xs[k - 1])


def sync_satisfied(ue, window_samples, timeliness_samples: Optional[Sequence[float]] = None,
                   q: float = 95.0) -> bool:
    """95th-percentile precision and timeliness both within the UE's targets.

    ``window_samples`` is either a list of ``(precision_err, timeliness)``
    pairs, or, when ``timeliness_samples`` is given, the precision samples
    alone (the two are collected at different rates in a simulation).
    """
    if timeliness_samples is None:
        if not window_samples:
            raise ValueError("empty window")
        prec = [abs(p) for p, _ in window_samples]
        tim = [t for _, t in window_samples]
    else:
        prec = [abs(p) for p in window_samples]
        tim = list(timeliness_samples)
        if not prec or not tim:
            return False
    req = ue.sync_req
    return percentile(prec, q) <= req.precision_target and percentile(tim, q) <= req.timeliness_target


def comm_satisfied(ue, latencies: Sequence[float], delivered_bytes: int, offered_bytes: int,
                   throughput_fraction: float = 0.95, q: float = 95.0) -> bool:
    """p95 latency (drops as ``inf``) within ``max_latency`` and enough throughput."""
    if not latencies:
        return True
    if percentile(latencies, q) > ue.comm_req.max_latency:
        return False
    return delivered_bytes >= throughput_fraction * offered_bytes


@dataclass
class MetricsReport:
    sync_satisfaction: float = 0.0
    comm_satisfaction: float = 0.0
    mean_precision: float = 0.0
    p95_precision: float = 0.0
    mean_timeliness: float = 0.0
    control_plane_bytes: int = 0
    user_plane_bytes: int = 0
    total_overhead_bytes: int = 0
    integration_gain: float = 0.0
    sync_header_user_bytes: int = 0
    ue_sessions: int = 0
    sessions_completed: int = 0
    sessions_failed: int = 0
    piggybacked: int = 0
    blocks_used: int = 0
    comm_dropped: int = 0

    def __post_init__(self):
        for name in ("sync_satisfaction", "comm_satisfaction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be a fraction")

    @property
    def satisfaction(self) -> float:
        return 0.5 * (self.sync_satisfaction + self.comm_satisfaction)

    @property
    def total_bytes(self) -> int:
        return self.control_plane_bytes + self.user_plane_bytes

    @property
    def header_bytes_per_ue_session(self) -> float:
        return self.sync_header_user_bytes / self.ue_sessions if self.ue_sessions else 0.0

    def as_row(self) -> dict:
        row = {f.name: getattr(self, f.name) for f in fields(self)}
        row["satisfaction"] = self.satisfaction
        row["header_bytes_per_ue_session"] = self.header_bytes_per_ue_session
        return row


def integration_gain(isync: MetricsReport, baseline: MetricsReport, lam: float = 0.5) -> float:
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must be in [0, 1]")
    quality = isync.satisfaction - baseline.satisfaction
    if baseline.total_overhead_bytes == 0:
        efficiency = 0.0
    else:
        efficiency = 1.0 - isync.total_overhead_bytes / baseline.total_overhead_bytes
    return lam * quality + (1.0 - lam) * efficiency


@dataclass
class ByteCounters:
    """Running per-plane byte totals; also used to re-add a trace independently."""

    control: int = 0
    user: int = 0
    overhead: int = 0
    sync_header_user: int = 0
    messages: int = 0

    def add(self, plane: str, total: int, overhead: int, sync_header_user: int = 0) -> None:
        if plane == "control":
            self.control += total
        elif plane == "user":
            self.user += total
        else:
            raise ValueError(f"unknown plane {plane!r}")
        self.overhead += overhead
        self.sync_header_user += sync_header_user
        self.messages += 1

    @classmethod
    def from_trace(cls, rows: Iterable[dict]) -> "ByteCounters":
        acc = cls()
        for r in rows:
            acc.add(r["plane"], int(r["bytes"]), int(r["overhead_bytes"]))
        return acc


@dataclass
class UeStats:
    precision: list = field(default_factory=list)
    timeliness: list = field(default_factory=list)
    latencies: list = field(default_factory=list)
    offered_bytes: int = 0
    delivered_bytes: int = 0
