"""Hybrid scheme planning: service value, CE prioritisation, location clusters, SDU aggregation."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from . import codec
from .codec import SubPdu


@dataclass(frozen=True)
class SyncRequirement:
    precision_target: int
    timeliness_target: int

    def __post_init__(self):
        if self.precision_target <= 0 or self.timeliness_target <= 0:
            raise ValueError("sync targets must be positive")


@dataclass(frozen=True)
class CommRequirement:
    min_throughput: float  # bytes/s
    max_latency: int

    def __post_init__(self):
        if self.min_throughput < 0 or self.max_latency <= 0:
            raise ValueError("comm requirement out of range")


@dataclass(frozen=True)
class UeProfile:
    ue_id: int
    position: tuple
    sync_req: SyncRequirement
    comm_req: CommRequirement
    weights: tuple = (0.5, 0.5)

    def __post_init__(self):
        if len(self.position) != 2 or not all(math.isfinite(v) for v in self.position):
            raise ValueError("position must be a finite 2-D point")
        w_s, w_c = self.weights
        if w_s < 0 or w_c < 0 or abs(w_s + w_c - 1.0) > 1e-9:
            raise ValueError("weights must be non-negative and sum to 1")


@dataclass(frozen=True)
class NormalizationConstants:
    p_ref: float
    l_ref: float

    def __post_init__(self):
        if self.p_ref <= 0 or self.l_ref <= 0:
            raise ValueError("normalization constants must be positive")


def service_value(ue: UeProfile, norm: NormalizationConstants) -> float:
    """Weighted stringency in [0, 1]: tighter targets score higher."""
    w_s, w_c = ue.weights
    s = min(norm.p_ref / ue.sync_req.precision_target, 1.0)
    c = min(norm.l_ref / ue.comm_req.max_latency, 1.0)
    return w_s * s + w_c * c


def select_prioritized(ues: Iterable[UeProfile], control_plane_budget: int,
                       norm: Optional[NormalizationConstants] = None):
    """Split UEs into (ce_set, sdu_set): the top-budget by service value get CEs."""
    if control_plane_budget < 0:
        raise ValueError("budget must be >= 0")
    ues = list(ues)
    if norm is None:
        norm = NormalizationConstants(
            min(u.sync_req.precision_target for u in ues) if ues else 1.0,
            min(u.comm_req.max_latency for u in ues) if ues else 1.0,
        )
    ranked = sorted(ues, key=lambda u: (-service_value(u, norm), u.ue_id))
    ce = ranked[:control_plane_budget]
    chosen = {u.ue_id for u in ce}
    return ce, [u for u in ues if u.ue_id not in chosen]


@dataclass(frozen=True)
class Cluster:
    head: int
    members: tuple
    centroid: tuple

    def __post_init__(self):
        if not self.members or self.head not in self.members:
            raise ValueError("cluster must be non-empty and contain its head")


def cluster_by_location(ues: Iterable[UeProfile], max_radius: float,
                        max_size: Optional[int] = None) -> list:
    """Greedy max-coverage clustering.

    Each round seeds a cluster at the unclustered UE with the most unclustered
    neighbours within ``max_radius`` (ties: lower ue_id) and takes those
    neighbours. ``max_size`` keeps the nearest ones when a cluster would be
    too big for one aggregated SDU.
    """
    if max_radius <= 0:
        raise ValueError("max_radius must be positive")
    if max_size is not None and max_size < 1:
        raise ValueError("max_size must be >= 1")
    ues = sorted(ues, key=lambda u: u.ue_id)
    if not ues:
        return []
    ids = np.array([u.ue_id for u in ues])
    pos = np.array([u.position for u in ues], dtype=float)
    dist = np.sqrt(((pos[:, None, :] - pos[None, :, :]) ** 2).sum(-1))
    near = dist <= max_radius
    free = np.ones(len(ues), dtype=bool)
    clusters = []
    while free.any():
        counts = (near & free[None, :]).sum(1)
        counts[~free] = -1
        seed = int(np.argmax(counts))  # first max = lowest ue_id
        cand = np.flatnonzero(near[seed] & free)
        cand = cand[np.lexsort((ids[cand], dist[seed, cand]))]
        if max_size is not None:
            cand = cand[:max_size]
        free[cand] = False
        members = tuple(int(ids[i]) for i in sorted(cand, key=lambda i: ids[i]))
        centroid = tuple(float(v) for v in pos[cand].mean(0))
        clusters.append(Cluster(int(ids[seed]), members, centroid))
    return clusters


def aggregate_sync_sdus(cluster: Cluster, per_member_payloads: Mapping[int, bytes],
                        type_bits: int = 0):
    """Build one aggregated sub-PDU for the cluster.

    Returns ``(subpdu, skipped)``; members without a payload are skipped and
    listed. ``subpdu`` is ``None`` when nobody contributed.
    """
    entries, skipped = [], []
    for ue in cluster.members:
        if ue in per_member_payloads:
            entries.append((ue, bytes(per_member_payloads[ue])))
        else:
            skipped.append(ue)
    if not entries:
        return None, skipped
    body = codec.encode_aggregate(entries, type_bits)
    return codec.sdu_subpdu(codec.LCID_ISYNC_AGG, body), skipped


def aggregation_saves(n: int, h: int) -> bool:
    """Closed form: aggregating n SDUs with per-SDU header h saves bytes."""
    return n * h > n * codec.MEMBER_ID_BYTES + 1 + h


def clusters_to_csv(clusters: list, ues: Iterable[UeProfile]) -> str:
    where = {u.ue_id: u.position for u in ues}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["ue", "cluster", "head", "distance"])
    for k, c in enumerate(clusters):
        hx, hy = where[c.head]
        for ue in c.members:
            x, y = where[ue]
            w.writerow([ue, k, c.head, f"{math.hypot(x - hx, y - hy):.3f}"])
    return buf.getvalue()
