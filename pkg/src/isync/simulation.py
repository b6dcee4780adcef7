"""Discrete-event scenario engine.

One BS and ``n_ues`` UEs share a single TTI x block grid for both
directions. Communication packets and synchronization messages become
access requests; each TTI the scheduler grants blocks, granted messages
depart at the TTI start and arrive after the channel delay.

The run is driven by an :class:`~isync.sim.EventQueue`; TTI boundaries
are processed after every event due at or before them.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import codec
from .clock import ClockState, apply_correction, clock_error, read_local
from .cluster import (
    CommRequirement,
    NormalizationConstants,
    SyncRequirement,
    UeProfile,
    cluster_by_location,
    select_prioritized,
)
from .codec import MacPdu
from .metrics import ByteCounters, MetricsReport, UeStats, comm_satisfied, sync_satisfied
from .protocol import (
    BsAgent,
    Carriage,
    Phase,
    Role,
    SessionStateMachine,
    SyncMessage,
    SyncPolicy,
    check_deadline,
    message_subpdu,
    next_sync_time,
    SqiReport,
    ue_handle_dl,
    ue_on_sent,
    wire_cost,
    WireCost,
)
from .scenario import ScenarioConfig, Scheme
from .scheduler import AccessRequest, Priority, ResourceGrid, Service, Urgency, allocate, classify, try_piggyback
from .sim import BS_NODE, ChannelModel, Direction, EventQueue, make_rng, transmit

# RNG stream ids, combined with (seed, ue_id) so populations nest across n_ues
STREAM_CLOCK, STREAM_NOISE, STREAM_COMM, STREAM_CHANNEL, STREAM_START, STREAM_POS, STREAM_WEIGHT, STREAM_TSERR = range(8)

TRACE_COLUMNS = ["time_ns", "node", "session", "message", "direction", "bytes", "plane", "ts_bytes", "overhead_bytes"]
FINAL_ROLES = {Role.F2, Role.DELAY_RESP}


@dataclass
class Unit:
    """A sync unit: one UE, or a cluster that runs sessions in lockstep."""

    unit_id: int
    members: tuple
    carriage: Carriage
    compress: bool


@dataclass
class Outbound:
    seq: int
    service: Service
    ue: int
    direction: Direction
    deadline: int
    created: int
    cost: WireCost
    subpdu: Optional[codec.SubPdu] = None
    msg: Optional[SyncMessage] = None
    piggybackable: bool = False
    state: str = "new"

    def key(self):
        return (self.deadline, self.ue, self.seq)


@dataclass
class RunResult:
    report: MetricsReport
    trace: list = field(default_factory=list)
    units: list = field(default_factory=list)
    profiles: list = field(default_factory=list)


def build_profiles(cfg: ScenarioConfig) -> list:
    out = []
    rate = cfg.comm.packet_bytes / (cfg.comm.period_ns * 1e-9)
    for ue in range(cfg.n_ues):
        pos = make_rng(cfg.seed, ue, STREAM_POS).uniform(0.0, cfg.cluster.area_m, 2)
        w = float(make_rng(cfg.seed, ue, STREAM_WEIGHT).uniform(0.0, 1.0))
        out.append(UeProfile(
            ue, (float(pos[0]), float(pos[1])),
            SyncRequirement(cfg.sync.precision_target_ns, cfg.sync.timeliness_target_ns),
            CommRequirement(rate * cfg.comm.throughput_fraction, cfg.comm.max_latency_ns),
            (w, 1.0 - w),
        ))
    return out


def build_units(cfg: ScenarioConfig, profiles: list) -> list:
    scheme = cfg.scheme
    if scheme is Scheme.SEPARATED:
        return [Unit(p.ue_id, (p.ue_id,), Carriage.PTP, False) for p in profiles]
    if scheme is Scheme.SDU:
        return [Unit(p.ue_id, (p.ue_id,), Carriage.SDU, False) for p in profiles]
    if scheme is Scheme.CE:
        return [Unit(p.ue_id, (p.ue_id,), Carriage.CE, True) for p in profiles]
    norm = NormalizationConstants(cfg.cluster.p_ref_ns, cfg.cluster.l_ref_ns)
    ce_set, sdu_set = select_prioritized(profiles, cfg.cluster.ce_budget, norm)
    units = [Unit(p.ue_id, (p.ue_id,), Carriage.CE, True) for p in ce_set]
    for c in cluster_by_location(sdu_set, cfg.cluster.max_radius_m, cfg.cluster.max_cluster_size):
        if len(c.members) >= 2:
            units.append(Unit(c.head, c.members, Carriage.AGG, True))
        else:
            units.append(Unit(c.head, c.members, Carriage.SDU, True))
    return sorted(units, key=lambda u: u.unit_id)


class Simulation:
    def __init__(self, cfg: ScenarioConfig, trace: bool = False):
        self.cfg = cfg
        self.trace_on = trace
        self.trace: list = []
        s = cfg.sync
        self.policy = SyncPolicy(s.precision_target_ns, s.timeliness_target_ns, s.base_period_ns,
                                 tuple(tuple(b) for b in s.sqi_scaling))
        ch = cfg.channel
        jitter = {"none": ("none",), "uniform": ("uniform", ch.jitter_a, ch.jitter_b),
                  "normal": ("normal", ch.jitter_a, ch.jitter_b)}[ch.jitter]
        self.channel = ChannelModel(ch.dl_delay_ns, ch.ul_delay_ns, jitter, ch.loss_prob, ch.asymmetry_ns, ch.ns_per_byte)
        g = cfg.grid
        self.grid = ResourceGrid(g.tti_ns, g.n_blocks, g.block_bytes, g.capacity_multiplier)
        self.window = int(g.urgency_ttis * g.tti_ns)
        self.bs = BsAgent(s3_hold_ns=s.s3_hold_ns)
        self.queue = EventQueue()
        self.profiles = build_profiles(cfg)
        self.units = {u.unit_id: u for u in build_units(cfg, self.profiles)}
        self.unit_of = {m: u.unit_id for u in self.units.values() for m in u.members}

        self.clocks = {}
        self.noise_rng = {}
        self.chan_rng = {}
        self.tserr_rng = make_rng(cfg.seed, 0xB5, STREAM_TSERR)
        for p in self.profiles:
            r = make_rng(cfg.seed, p.ue_id, STREAM_CLOCK)
            off = float(r.uniform(-cfg.clock.offset_range_ns, cfg.clock.offset_range_ns))
            sk = float(r.uniform(-cfg.clock.skew_range_ppm, cfg.clock.skew_range_ppm))
            self.clocks[p.ue_id] = ClockState(off, sk, cfg.clock.rw_sigma, 0, cfg.clock.max_skew_ppm)
            self.noise_rng[p.ue_id] = make_rng(cfg.seed, p.ue_id, STREAM_NOISE)
            self.chan_rng[p.ue_id] = make_rng(cfg.seed, p.ue_id, STREAM_CHANNEL)

        self.sm: dict[int, SessionStateMachine] = {}
        self.sm_started: dict[int, int] = {}
        self.last_err: dict[int, Optional[float]] = {p.ue_id: None for p in self.profiles}
        self.contrib: dict[int, dict] = {}
        self.stats = {p.ue_id: UeStats() for p in self.profiles}
        self.counters = ByteCounters()
        self.ready: list = []
        self.held: dict = {}
        self._seq = 0
        self.piggybacked = 0
        self.blocks_used = 0
        self.comm_dropped = 0
        self.ue_sessions = 0
        self.completed = 0
        self.failed = 0
        self.comm_dir: dict[int, int] = {}

    # ------------------------------------------------------------------ helpers

    def _in_window(self, t: int, tail: int = 0) -> bool:
        return self.cfg.warmup_ns <= t <= self.cfg.duration_ns - tail

    def _new_item(self, **kw) -> Outbound:
        self._seq += 1
        return Outbound(seq=self._seq, **kw)

    def _enqueue(self, item: Outbound, now: int) -> None:
        if self.cfg.grid.piggyback and item.piggybackable and item.deadline - now >= self.window:
            item.state = "held"
            self.held.setdefault((item.ue, item.direction), []).append(item)
            self.queue.schedule(item.deadline - self.window, BS_NODE, ("release", item))
        else:
            item.state = "ready"
            heapq.heappush(self.ready, (item.key(), item))

    def _sync_item(self, msg: SyncMessage, now: int, deadline: Optional[int] = None) -> Outbound:
        unit = self.units[msg.unit]
        cost = wire_cost(msg, self.cfg.grid.upper_header_bytes, self.cfg.sync.h_base)
        if msg.direction is Direction.UL:
            ue = unit.unit_id if unit.carriage is Carriage.AGG else msg.members[0]
        else:
            ue = unit.unit_id if unit.carriage is Carriage.AGG else unit.members[0]
        group_dl = unit.carriage is Carriage.AGG and msg.direction is Direction.DL
        pig = unit.carriage is not Carriage.PTP and not group_dl
        return self._new_item(service=Service.SYNC, ue=ue, direction=msg.direction,
                              deadline=deadline if deadline is not None else now + self.cfg.sync.msg_budget_ns,
                              created=now, cost=cost, subpdu=message_subpdu(msg), msg=msg, piggybackable=pig)

    def _send_sync(self, msg: SyncMessage, now: int) -> None:
        unit = self.units[msg.unit]
        deadline = None
        if unit.carriage is Carriage.PTP:
            s = self.bs.sessions.get(msg.unit)
            deadline = s.deadline if s is not None else now + self.cfg.sync.session_timeout_ns
        self._enqueue(self._sync_item(msg, now, deadline), now)

    def _account(self, item: Outbound, t: int) -> None:
        c = item.cost
        sync_hdr = c.header if item.service is Service.SYNC and c.plane == "user" else 0
        self.counters.add(c.plane, c.total, c.overhead, sync_hdr)
        if self.trace_on:
            msg = item.msg
            self.trace.append({
                "time_ns": t,
                "node": item.ue if item.direction is Direction.UL else BS_NODE,
                "session": msg.session_id if msg else 0,
                "message": msg.role.value if msg else "Comm",
                "direction": item.direction.value,
                "bytes": c.total,
                "plane": c.plane,
                "ts_bytes": c.timestamp,
                "overhead_bytes": c.overhead,
            })

    def _record_timeliness(self, ue: int, started: int, value: float) -> None:
        if self._in_window(started, self.cfg.sync.session_timeout_ns):
            self.stats[ue].timeliness.append(value)

    def _fail(self, ue: int) -> None:
        sm = self.sm.get(ue)
        if sm is not None and not sm.done:
            sm.phase = Phase.FAILED
            self.failed += 1
            self._record_timeliness(ue, self.sm_started[ue], math.inf)

    # ------------------------------------------------------------------ sessions

    def _start(self, unit_id: int, now: int) -> None:
        unit = self.units[unit_id]
        s = self.cfg.sync
        deadline = now + s.session_timeout_ns
        phy = s.phy_timestamping or unit.carriage is Carriage.PTP
        msg = self.bs.initiate(unit_id, unit.members, unit.carriage, now, deadline, phy, unit.compress)
        if msg is None:
            return
        for m in unit.members:
            self._fail(m)
            err = self.last_err[m]
            level = 255 if err is None else min(255, int(math.floor(256 * min(err / s.precision_target_ns, 1.0))))
            self.sm[m] = SessionStateMachine(m, msg.session_id, unit.carriage, phy, unit.compress, deadline, level)
            self.sm_started[m] = now
            self.ue_sessions += 1
        self.contrib.pop(unit_id, None)
        self.queue.schedule(deadline, BS_NODE, ("timeout", unit_id, msg.session_id))
        self._send_sync(msg, now)

    def _schedule_next(self, unit_id: int, session, now: int) -> None:
        unit = self.units[unit_id]
        if unit.carriage is Carriage.PTP:
            nxt = session.initiated_at + self.cfg.sync.baseline_period_ns
        else:
            worst = max([v for v in session.sqi.values()] or [255])
            nxt = next_sync_time(self.policy, SqiReport(worst), session.initiated_at)
        self.queue.schedule(max(nxt, now + 1), BS_NODE, ("start", unit_id))

    def _close(self, unit_id: int, now: int) -> None:
        session = self.bs.close(unit_id)
        if session is not None:
            self._schedule_next(unit_id, session, now)

    def _timeout(self, unit_id: int, sid: int, now: int) -> None:
        s = self.bs.sessions.get(unit_id)
        if s is not None and s.session_id == sid:
            self.bs.close(unit_id)
            nxt = s.initiated_at + (self.cfg.sync.baseline_period_ns if s.carriage is Carriage.PTP
                                    else self.cfg.sync.base_period_ns)
            self.queue.schedule(max(nxt, now + 1), BS_NODE, ("start", unit_id))
        for m in self.units[unit_id].members:
            sm = self.sm.get(m)
            if sm is not None and sm.session_id == sid:
                if check_deadline(sm, now):
                    self.failed += 1
                    self._record_timeliness(m, self.sm_started[m], math.inf)

    def _flush_aggregate(self, unit_id: int, sid: int, now: int) -> None:
        pending = self.contrib.get(unit_id)
        if not pending or pending["sid"] != sid or pending["sent"]:
            return
        pending["sent"] = True
        entries = tuple(sorted(pending["entries"].items()))
        unit = self.units[unit_id]
        msg = SyncMessage(Role.S2, sid, unit_id, tuple(e[0] for e in entries), unit.carriage, b"", entries)
        self._send_sync(msg, now)

    # ------------------------------------------------------------------ radio

    def _depart(self, item: Outbound, now: int) -> None:
        """``item`` leaves in the TTI starting at ``now``."""
        item.state = "sent"
        self._account(item, now)
        if item.service is Service.COMM:
            self._deliver_comm(item, now)
            return
        msg = item.msg
        unit = self.units[msg.unit]
        t_dep = now
        if not self.cfg.sync.phy_timestamping and unit.carriage is not Carriage.PTP and self.cfg.sync.timestamp_error_ns:
            e = self.cfg.sync.timestamp_error_ns
            t_dep = now + int(self.tserr_rng.integers(-e, e + 1))
        size = item.cost.total
        if msg.direction is Direction.DL:
            follow = self.bs.on_sent(msg, t_dep, now)
            if follow is not None:
                self._send_sync(follow, now)
            if msg.role in FINAL_ROLES or (msg.role is Role.S3 and not self.bs_phy(msg.unit)):
                s = self.bs.sessions.get(msg.unit)
                if s is not None and s.session_id == msg.session_id:
                    self._close(msg.unit, now)
            for m in msg.members:
                d = transmit(self.channel, Direction.DL, size, self.chan_rng[m])
                if d is not None:
                    self.queue.schedule(max(now, t_dep + d), m, ("dl", m, msg, now))
        else:
            senders = [e[0] for e in msg.entries] if msg.entries else list(msg.members)
            for m in senders:
                sm = self.sm.get(m)
                if sm is not None and sm.session_id == msg.session_id:
                    ue_on_sent(sm, read_local(self.clocks[m], t_dep, self.noise_rng[m]))
            d = transmit(self.channel, Direction.UL, size, self.chan_rng[item.ue])
            if d is not None:
                self.queue.schedule(max(now, t_dep + d), BS_NODE, ("ul", msg))

    def bs_phy(self, unit_id: int) -> bool:
        s = self.bs.sessions.get(unit_id)
        return s.phy if s is not None else True

    def _deliver_comm(self, item: Outbound, now: int) -> None:
        st = self.stats[item.ue]
        d = transmit(self.channel, item.direction, item.cost.total, self.chan_rng[item.ue])
        counted = self._in_window(item.created, self.cfg.comm.max_latency_ns)
        if d is None:
            if counted:
                st.latencies.append(math.inf)
            return
        if counted:
            st.latencies.append(now + d - item.created)
            st.delivered_bytes += item.cost.app

    def _drop(self, item: Outbound) -> None:
        item.state = "dropped"
        if item.service is Service.COMM:
            self.comm_dropped += 1
            if self._in_window(item.created, self.cfg.comm.max_latency_ns):
                self.stats[item.ue].latencies.append(math.inf)

    def _piggyback(self, comm: Outbound, now: int) -> None:
        bucket = self.held.get((comm.ue, comm.direction))
        if not bucket:
            return
        pdu = MacPdu([comm.subpdu])
        capacity = self.cfg.grid.block_bytes - self.cfg.grid.upper_header_bytes
        keep = []
        for h in bucket:
            if h.state != "held":
                continue
            req = AccessRequest(h.ue, Service.SYNC, h.cost.total, h.deadline, Priority.NORMAL, True,
                                h.direction, h.subpdu)
            out = try_piggyback(req, pdu, Urgency.LOW, capacity)
            if out is pdu:
                keep.append(h)
                continue
            pdu = out
            self.piggybacked += 1
            self._depart(h, now)
        if keep:
            self.held[(comm.ue, comm.direction)] = keep
        else:
            del self.held[(comm.ue, comm.direction)]

    def _tti(self, k: int) -> None:
        now = self.grid.tti_start(k)
        self.grid.prune(k)
        cands = []
        limit = self.grid.blocks_per_tti
        while self.ready and (len(cands) < limit or self.ready[0][0][0] < now + self.window):
            _, item = heapq.heappop(self.ready)
            if item.state != "ready":
                continue
            if self.grid.last_usable_tti(item.deadline) < k:
                self._drop(item)
                continue
            cands.append(item)
        if not cands:
            return
        reqs = []
        for item in cands:
            prio = Priority.NORMAL
            if item.service is Service.SYNC and item.msg.carriage is not Carriage.PTP:
                prio = classify(item.deadline, now, self.grid.tti_length, self.cfg.grid.urgency_ttis)
            reqs.append(AccessRequest(item.ue, item.service, item.cost.total, item.deadline, prio,
                                      item.piggybackable, item.direction, item.subpdu, item))
        plan = allocate(self.grid, reqs, now, n_ttis=1)
        for g in sorted(plan.grants, key=lambda g: g.blocks):
            item = g.request.tag
            self.blocks_used += len(g.blocks)
            self._depart(item, now)
            if item.service is Service.COMM and self.cfg.grid.piggyback:
                self._piggyback(item, now)
        for req in plan.unsatisfiable:
            heapq.heappush(self.ready, (req.tag.key(), req.tag))

    # ------------------------------------------------------------------ events

    def _comm(self, ue: int, now: int) -> None:
        c = self.cfg.comm
        k = self.comm_dir.get(ue, 0)
        self.comm_dir[ue] = k + 1
        direction = Direction.DL if (k + ue) % 2 == 0 else Direction.UL
        sp = codec.sdu_subpdu(1 + ue % 28, bytes(c.packet_bytes))
        total = sp.size + self.cfg.grid.upper_header_bytes
        cost = WireCost(total, 0, total - c.packet_bytes, "user", c.packet_bytes)
        item = self._new_item(service=Service.COMM, ue=ue, direction=direction,
                              deadline=now + c.max_latency_ns, created=now, cost=cost, subpdu=sp)
        if self._in_window(now, c.max_latency_ns):
            self.stats[ue].offered_bytes += c.packet_bytes
        self._enqueue(item, now)
        self.queue.schedule(now + c.period_ns, ue, ("comm", ue))

    def _dl(self, m: int, msg: SyncMessage, sched: int, now: int) -> None:
        sm = self.sm.get(m)
        if sm is None:
            return
        clock = self.clocks[m]
        local = read_local(clock, now, self.noise_rng[m])
        _, out, est = ue_handle_dl(msg, local, sm, scheduled_departure=sched, now=now)
        if out is not None:
            unit = self.units[msg.unit]
            if unit.carriage is Carriage.AGG:
                pending = self.contrib.get(unit.unit_id)
                if pending is None or pending["sid"] != msg.session_id:
                    pending = {"sid": msg.session_id, "entries": {}, "sent": False}
                    self.contrib[unit.unit_id] = pending
                    self.queue.schedule(now + self.grid.tti_length, BS_NODE, ("flush", unit.unit_id, msg.session_id))
                if not pending["sent"]:
                    pending["entries"][m] = out.entries[0][1]
                    if len(pending["entries"]) == len(msg.members):
                        self._flush_aggregate(unit.unit_id, msg.session_id, now)
            else:
                self._send_sync(out, now)
        if est is not None:
            if sm.phase is Phase.COMPLETE:
                self.clocks[m] = apply_correction(clock, est, now, self.noise_rng[m])
                self.last_err[m] = abs(est.offset_hat)
                self.completed += 1
                self._record_timeliness(m, self.sm_started[m], now - self.sm_started[m])
            else:
                self.failed += 1
                self._record_timeliness(m, self.sm_started[m], math.inf)

    def _ul(self, msg: SyncMessage, now: int) -> None:
        reply = self.bs.on_uplink(msg, now)
        if reply is None:
            return
        if reply.role is Role.S3:
            release = self.bs.s3_release_time(msg.unit, now)
            if release > now:
                self.queue.schedule(release, BS_NODE, ("send", reply))
                return
        self._send_sync(reply, now)

    def _sample(self, now: int) -> None:
        for ue, clock in self.clocks.items():
            self.stats[ue].precision.append(abs(clock_error(clock, now, self.noise_rng[ue])))
        nxt = now + self.cfg.metrics.sample_period_ns
        if nxt < self.cfg.duration_ns:
            self.queue.schedule(nxt, BS_NODE, ("sample",))

    def _handle(self, now: int, payload) -> None:
        kind = payload[0]
        if kind == "comm":
            self._comm(payload[1], now)
        elif kind == "dl":
            self._dl(payload[1], payload[2], payload[3], now)
        elif kind == "ul":
            self._ul(payload[1], now)
        elif kind == "send":
            self._send_sync(payload[1], now)
        elif kind == "release":
            item = payload[1]
            if item.state == "held":
                item.state = "ready"
                heapq.heappush(self.ready, (item.key(), item))
        elif kind == "flush":
            self._flush_aggregate(payload[1], payload[2], now)
        elif kind == "start":
            self._start(payload[1], now)
        elif kind == "timeout":
            self._timeout(payload[1], payload[2], now)
        elif kind == "sample":
            self._sample(now)
        else:  # pragma: no cover
            raise RuntimeError(f"unknown event {kind!r}")

    # ------------------------------------------------------------------ driver

    def run(self) -> RunResult:
        cfg = self.cfg
        for ue in sorted(self.clocks):
            phase = int(make_rng(cfg.seed, ue, STREAM_COMM).integers(0, cfg.comm.period_ns))
            self.queue.schedule(phase, ue, ("comm", ue))
        for uid in sorted(self.units):
            t0 = int(make_rng(cfg.seed, uid, STREAM_START).integers(0, cfg.sync.first_sync_window_ns))
            self.queue.schedule(t0, BS_NODE, ("start", uid))
        self.queue.schedule(cfg.warmup_ns, BS_NODE, ("sample",))

        tti = self.grid.tti_length
        n_tti = -(-cfg.duration_ns // tti)
        q = self.queue
        for k in range(n_tti):
            boundary = k * tti
            while len(q) and q.peek_time() <= boundary:
                ev = q.pop()
                self._handle(ev.time, ev.payload)
            self._tti(k)
        while len(q) and q.peek_time() < cfg.duration_ns:
            ev = q.pop()
            self._handle(ev.time, ev.payload)
        return RunResult(self._report(), self.trace, list(self.units.values()), self.profiles)

    def _report(self) -> MetricsReport:
        cfg = self.cfg
        q = cfg.metrics.percentile
        sync_ok = comm_ok = 0
        prec_all, tim_all = [], []
        for p in self.profiles:
            st = self.stats[p.ue_id]
            if sync_satisfied(p, st.precision, st.timeliness, q):
                sync_ok += 1
            if comm_satisfied(p, st.latencies, st.delivered_bytes, st.offered_bytes, cfg.comm.throughput_fraction, q):
                comm_ok += 1
            prec_all.extend(st.precision)
            tim_all.extend(t for t in st.timeliness if math.isfinite(t))
        n = len(self.profiles)
        prec = np.asarray(prec_all, dtype=float)
        return MetricsReport(
            sync_satisfaction=sync_ok / n,
            comm_satisfaction=comm_ok / n,
            mean_precision=float(prec.mean()) if prec.size else 0.0,
            p95_precision=float(np.sort(prec)[max(0, math.ceil(0.95 * prec.size) - 1)]) if prec.size else 0.0,
            mean_timeliness=float(np.mean(tim_all)) if tim_all else 0.0,
            control_plane_bytes=self.counters.control,
            user_plane_bytes=self.counters.user,
            total_overhead_bytes=self.counters.overhead,
            sync_header_user_bytes=self.counters.sync_header_user,
            ue_sessions=self.ue_sessions,
            sessions_completed=self.completed,
            sessions_failed=self.failed,
            piggybacked=self.piggybacked,
            blocks_used=self.blocks_used,
            comm_dropped=self.comm_dropped,
        )


def run_scenario(cfg: ScenarioConfig, trace: bool = False) -> RunResult:
    return Simulation(cfg, trace).run()
