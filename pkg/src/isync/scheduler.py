"""Service-oriented access scheduling on a TTI x frequency-block grid.

High-priority sync requests are placed first at their earliest feasible TTI;
everything else fills what is left in earliest-deadline-first order. For
single-block requests both passes are optimal in the number served.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Optional

from .codec import MacPdu, SubPdu
from .sim import Direction


class Service(str, enum.Enum):
    COMM = "comm"
    SYNC = "sync"


class Priority(str, enum.Enum):
    HIGH = "high"
    NORMAL = "normal"


class Urgency(str, enum.Enum):
    LOW = "low"
    HIGH = "high"


@dataclass(frozen=True)
class AccessRequest:
    ue_id: int
    service: Service
    payload_bytes: int
    deadline: int
    priority_class: Priority = Priority.NORMAL
    piggybackable: bool = False
    direction: Direction = Direction.DL
    subpdu: Optional[SubPdu] = None
    tag: Any = None

    def __post_init__(self):
        if self.payload_bytes <= 0:
            raise ValueError("payload_bytes must be positive")
        if self.priority_class is Priority.HIGH and self.service is not Service.SYNC:
            raise ValueError("only sync requests may be High priority")


def classify(deadline: int, now: int, tti_length: int, threshold_ttis: float = 2.0) -> Priority:
    return Priority.HIGH if deadline - now < threshold_ttis * tti_length else Priority.NORMAL


@dataclass
class ResourceGrid:
    tti_length: int
    n_freq_blocks: int
    block_bytes: int
    capacity_multiplier: int = 1  # spatial layers, folded into block count
    allocation: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tti_length <= 0 or self.n_freq_blocks <= 0 or self.block_bytes <= 0:
            raise ValueError("grid dimensions must be positive")
        if self.capacity_multiplier < 1:
            raise ValueError("capacity_multiplier must be >= 1")

    @property
    def blocks_per_tti(self) -> int:
        return self.n_freq_blocks * self.capacity_multiplier

    def tti_of(self, t: int) -> int:
        """Index of the first TTI starting at or after ``t``."""
        return -(-t // self.tti_length)

    def tti_start(self, k: int) -> int:
        return k * self.tti_length

    def last_usable_tti(self, deadline: int) -> int:
        """Last TTI that finishes transmitting by ``deadline``."""
        return (deadline - self.tti_length) // self.tti_length

    def blocks_for(self, nbytes: int) -> int:
        return max(1, math.ceil(nbytes / self.block_bytes))

    def prune(self, before_tti: int) -> None:
        """Forget allocations of TTIs that have already passed."""
        for key in [k for k in self.allocation if k[0] < before_tti]:
            del self.allocation[key]

    def free_blocks(self, tti: int) -> int:
        used = sum(1 for (k, _b) in self.allocation if k == tti)
        return self.blocks_per_tti - used


@dataclass(frozen=True)
class Grant:
    request: AccessRequest
    tti: int
    blocks: tuple


@dataclass
class AllocationPlan:
    first_tti: int
    n_ttis: int
    blocks_per_tti: int
    block_bytes: int
    grants: list = field(default_factory=list)
    unsatisfiable: list = field(default_factory=list)

    def served(self) -> set:
        return {id(g.request) for g in self.grants}

    def grants_in(self, tti: int) -> list:
        return [g for g in self.grants if g.tti == tti]

    def used_blocks(self, tti: int) -> int:
        return sum(len(g.blocks) for g in self.grants if g.tti == tti)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tti", "block", "ue", "service", "bytes"])
        for g in sorted(self.grants, key=lambda g: (g.tti, g.blocks)):
            remaining = g.request.payload_bytes
            for b in g.blocks:
                n = min(remaining, self.block_bytes)
                remaining -= n
                w.writerow([g.tti, b, g.request.ue_id, g.request.service.value, n])
        return buf.getvalue()


def _order(indexed):
    return sorted(indexed, key=lambda ir: (ir[1].deadline, ir[1].ue_id, ir[0]))


def allocate(grid: ResourceGrid, requests: Iterable[AccessRequest], now: int,
             n_ttis: int = 1) -> AllocationPlan:
    """Plan ``n_ttis`` TTIs starting at the first TTI at or after ``now``.

    Requests that cannot finish before their deadline inside the horizon are
    listed in ``unsatisfiable``; nothing is dropped silently. Blocks already
    present in ``grid.allocation`` are respected, and the grant map is
    written back into it.
    """
    first = grid.tti_of(now)
    plan = AllocationPlan(first, n_ttis, grid.blocks_per_tti, grid.block_bytes)
    free = [grid.free_blocks(first + i) for i in range(n_ttis)]
    nxt = [grid.blocks_per_tti - f for f in free]
    indexed = list(enumerate(requests))
    high = _order([ir for ir in indexed if ir[1].priority_class is Priority.HIGH])
    rest = _order([ir for ir in indexed if ir[1].priority_class is not Priority.HIGH])
    for _, req in high + rest:
        need = grid.blocks_for(req.payload_bytes)
        last = min(grid.last_usable_tti(req.deadline) - first, n_ttis - 1)
        placed = False
        for i in range(last + 1):
            if free[i] >= need:
                blocks = tuple(range(nxt[i], nxt[i] + need))
                free[i] -= need
                nxt[i] += need
                plan.grants.append(Grant(req, first + i, blocks))
                for b in blocks:
                    grid.allocation[(first + i, b)] = (req.ue_id, req.service)
                placed = True
                break
        if not placed:
            plan.unsatisfiable.append(req)
    return plan


def audit(plan: AllocationPlan, grid: ResourceGrid) -> list:
    """Post-hoc checks; returns a list of violations (empty when sound)."""
    problems = []
    seen = set()
    for g in plan.grants:
        for b in g.blocks:
            if (g.tti, b) in seen:
                problems.append(f"block {(g.tti, b)} double-assigned")
            seen.add((g.tti, b))
        if g.request.payload_bytes > len(g.blocks) * plan.block_bytes:
            problems.append(f"grant for ue {g.request.ue_id} exceeds its blocks")
        if g.tti > grid.last_usable_tti(g.request.deadline):
            problems.append(f"grant for ue {g.request.ue_id} misses its deadline")
    for k in range(plan.first_tti, plan.first_tti + plan.n_ttis):
        if plan.used_blocks(k) > plan.blocks_per_tti:
            problems.append(f"tti {k} over capacity")
    for req in plan.unsatisfiable:
        if req.priority_class is not Priority.HIGH:
            continue
        need = grid.blocks_for(req.payload_bytes)
        for g in plan.grants:
            if g.request.priority_class is Priority.NORMAL and g.tti <= grid.last_usable_tti(req.deadline):
                high_used = sum(len(h.blocks) for h in plan.grants_in(g.tti)
                                if h.request.priority_class is Priority.HIGH)
                if plan.blocks_per_tti - high_used >= need:
                    problems.append(f"normal ue {g.request.ue_id} ahead of unserved high ue {req.ue_id}")
                    break
    return problems


def try_piggyback(pending_sync: AccessRequest, outgoing_comm_pdu: MacPdu, urgency: Urgency,
                  capacity: int) -> MacPdu:
    """Append the sync sub-PDU to a granted comm PDU when urgency is Low and it fits.

    ``capacity`` is the byte size of the grant the comm PDU rides on.
    """
    if not pending_sync.piggybackable or urgency is not Urgency.LOW or pending_sync.subpdu is None:
        return outgoing_comm_pdu
    if capacity - outgoing_comm_pdu.size < pending_sync.payload_bytes:
        return outgoing_comm_pdu
    return MacPdu(list(outgoing_comm_pdu.subpdus) + [pending_sync.subpdu])


def with_priority(req: AccessRequest, now: int, tti_length: int, threshold_ttis: float = 2.0) -> AccessRequest:
    """Re-classify a sync request as time passes; comm requests stay Normal."""
    if req.service is not Service.SYNC:
        return req
    p = classify(req.deadline, now, tti_length, threshold_ttis)
    return req if p is req.priority_class else replace(req, priority_class=p)
