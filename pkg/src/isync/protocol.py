"""ISynC session state machines, SQI-driven resync and the separated PTP baseline.

A session runs S1 -> (F1) -> S2 -> S3 -> (F2); the follow-ups exist only
with PHY timestamping. Messages travel in one of four carriages:

* ``ce``    control elements on the reserved LCID (control plane)
* ``sdu``   ISynC SDUs on LCID 29 (user plane), one UE per message
* ``agg``   cluster carriage: downlink messages are group-addressed SDUs,
            the uplink S2 is one aggregated SDU relayed by the cluster head
* ``ptp``   four standalone baseline packets (Sync, Follow_Up, Delay_Req,
            Delay_Resp), offset-only estimation
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

from . import codec
from .clock import SyncEstimate, SyncSession, estimate_offset_skew, estimate_offset_two_way
from .codec import CeType, CompressedTimestamp
from .sim import Direction


class Carriage(str, enum.Enum):
    CE = "ce"
    SDU = "sdu"
    AGG = "agg"
    PTP = "ptp"


class Role(str, enum.Enum):
    S1 = "S1"
    F1 = "F1"
    S2 = "S2"
    S3 = "S3"
    F2 = "F2"
    SYNC = "Sync"
    FOLLOW_UP = "Follow_Up"
    DELAY_REQ = "Delay_Req"
    DELAY_RESP = "Delay_Resp"

    @property
    def direction(self) -> Direction:
        return Direction.UL if self in (Role.S2, Role.DELAY_REQ) else Direction.DL


class Phase(str, enum.Enum):
    IDLE = "Idle"
    SENT_S1 = "SentS1"
    AWAIT_F1 = "AwaitF1"
    AWAIT_S2 = "AwaitS2"
    SENT_S3 = "SentS3"
    AWAIT_S3 = "AwaitS3"
    AWAIT_F2 = "AwaitF2"
    COMPLETE = "Complete"
    FAILED = "Failed"


# --------------------------------------------------------------------------
# policy and SQI

DEFAULT_SQI_SCALING = ((85, 1.0), (170, 0.5), (255, 0.25))


@dataclass(frozen=True)
class SyncPolicy:
    precision_target: int
    timeliness_target: int
    base_period: int
    sqi_scaling: tuple = DEFAULT_SQI_SCALING

    def __post_init__(self):
        if self.base_period <= 0:
            raise ValueError("base_period must be positive")
        if self.precision_target <= 0 or self.timeliness_target <= 0:
            raise ValueError("targets must be positive")
        bands = [tuple(b) for b in self.sqi_scaling]
        if not bands or bands[-1][0] < 255:
            raise ValueError("sqi_scaling bands must cover levels up to 255")
        prev_upper, prev_mult = -1, math.inf
        for upper, mult in bands:
            if upper <= prev_upper:
                raise ValueError("sqi_scaling band edges must increase")
            if mult <= 0:
                raise ValueError("sqi multipliers must be positive")
            if mult > prev_mult:
                raise ValueError("worse SQI must not lengthen the resync period")
            prev_upper, prev_mult = upper, mult
        object.__setattr__(self, "sqi_scaling", tuple(bands))

    def multiplier(self, level: int) -> float:
        for upper, mult in self.sqi_scaling:
            if level <= upper:
                return mult
        return self.sqi_scaling[-1][1]


@dataclass(frozen=True)
class SqiReport:
    level: int

    def __post_init__(self):
        if not 0 <= self.level <= 255:
            raise ValueError("SQI level is one byte")


def sqi_level(error_ns: float, target_ns: float) -> int:
    ratio = min(abs(error_ns) / target_ns, 1.0)
    return min(255, int(math.floor(256 * ratio)))


def next_sync_time(policy: SyncPolicy, sqi: SqiReport, now: int) -> int:
    return now + int(round(policy.base_period * policy.multiplier(sqi.level)))


# --------------------------------------------------------------------------
# messages


@dataclass(frozen=True)
class SyncMessage:
    role: Role
    session_id: int
    unit: int
    members: tuple
    carriage: Carriage
    body: bytes = b""
    entries: tuple = ()

    @property
    def direction(self) -> Direction:
        return self.role.direction


_CE_ROLE = {Role.S1: CeType.S1, Role.F1: CeType.F1, Role.S2: CeType.S2, Role.S3: CeType.S3, Role.F2: CeType.F2}
_SDU_KIND = {Role.S1: codec.SduKind.FEEDBACK, Role.F1: codec.SduKind.TIMESTAMP, Role.S2: codec.SduKind.SQI,
             Role.S3: codec.SduKind.TIMESTAMP, Role.F2: codec.SduKind.TIMESTAMP}


def message_subpdu(msg: SyncMessage, ce_lcid: int = codec.LCID_ISYNC_CE) -> Optional[codec.SubPdu]:
    """MAC sub-PDU carrying ``msg``; ``None`` for baseline packets, which bypass the MAC model."""
    if msg.carriage is Carriage.CE:
        return codec.ce_subpdu(codec.IsyncCe(_CE_ROLE[msg.role], msg.body), ce_lcid)
    if msg.carriage is Carriage.PTP:
        return None
    if msg.carriage is Carriage.AGG and msg.role is Role.S2:
        return codec.sdu_subpdu(codec.LCID_ISYNC_AGG, codec.encode_aggregate(list(msg.entries), CeType.S2.type_bits))
    return codec.isync_sdu(codec.IsyncSduPayload(_SDU_KIND[msg.role], msg.body))


@dataclass(frozen=True)
class WireCost:
    total: int
    timestamp: int
    header: int
    plane: str
    app: int = 0

    @property
    def overhead(self) -> int:
        return self.total - self.timestamp - self.app


def timestamp_bytes(msg: SyncMessage) -> int:
    if msg.role in (Role.F1, Role.S3, Role.F2, Role.FOLLOW_UP, Role.DELAY_RESP):
        return len(msg.body)
    return 0


def wire_cost(msg: SyncMessage, upper_header: int = 4, h_base: int = 40) -> WireCost:
    """Bytes on air for ``msg`` and how many of them are overhead.

    User-plane SDUs pay ``upper_header`` modeled bytes (PDCP/RLC) once per SDU.
    Baseline packets carry an 8-byte field each; only the Follow_Up and
    Delay_Resp values are used, the Sync and Delay_Req fields count as overhead.
    """
    if msg.carriage is Carriage.PTP:
        ts = timestamp_bytes(msg)
        return WireCost(h_base + len(msg.body), ts, h_base + len(msg.body) - ts, "user")
    sp = message_subpdu(msg)
    ts = timestamp_bytes(msg)
    if msg.carriage is Carriage.CE:
        return WireCost(sp.size, ts, sp.size - len(msg.body), "control")
    header = sp.subheader.size + upper_header
    if msg.carriage is Carriage.AGG and msg.role is Role.S2:
        header += 1 + codec.MEMBER_ID_BYTES * len(msg.entries)
    return WireCost(sp.size + upper_header, ts, header, "user")


def _ts_body(carriage: Carriage, compress: bool, value: int, reference: Optional[int]) -> bytes:
    if carriage is Carriage.CE or (compress and reference is not None):
        return codec.compress_timestamp(value, reference).suffix_bytes()
    return codec.ts_to_bytes(value)


def _ts_value(body: bytes, compress: bool, carriage: Carriage, reference: Optional[int]) -> int:
    if carriage is Carriage.CE or compress:
        return codec.decompress_timestamp(CompressedTimestamp.from_bytes(body), reference)
    return codec.ts_from_bytes(body)


# --------------------------------------------------------------------------
# BS side


@dataclass
class BsSession:
    session_id: int
    unit: int
    members: tuple
    carriage: Carriage
    phy: bool
    compress: bool
    initiated_at: int
    deadline: int
    phase: Phase = Phase.SENT_S1
    t1: Optional[int] = None
    t4: Optional[int] = None
    t5: Optional[int] = None
    sqi: dict = field(default_factory=dict)
    sent: list = field(default_factory=list)


class BsAgent:
    """Reference-clock side of every active session, keyed by sync unit."""

    def __init__(self, s3_hold_ns: int = 0):
        self.sessions: dict[int, BsSession] = {}
        self.coalesced = 0
        self.s3_hold_ns = s3_hold_ns
        self._next_id = 1

    def initiate(self, unit: int, members, carriage: Carriage, now: int, deadline: int,
                 phy: bool = True, compress: bool = True) -> Optional[SyncMessage]:
        if unit in self.sessions:
            self.coalesced += 1
            return None
        sid = self._next_id
        self._next_id += 1
        members = tuple(members)
        self.sessions[unit] = BsSession(sid, unit, members, carriage, phy or carriage is Carriage.PTP,
                                        compress, now, deadline)
        if carriage is Carriage.PTP:
            # two-step Sync still carries a (coarse, duplicated) origin timestamp field
            return SyncMessage(Role.SYNC, sid, unit, members, carriage, bytes(codec.TIMESTAMP_BYTES))
        return SyncMessage(Role.S1, sid, unit, members, carriage)

    def _active(self, msg: SyncMessage) -> Optional[BsSession]:
        s = self.sessions.get(msg.unit)
        if s is None or s.session_id != msg.session_id:
            return None
        return s

    def on_sent(self, msg: SyncMessage, departure: int, scheduled: int) -> Optional[SyncMessage]:
        """Record the departure of a downlink message; returns the follow-up it triggers."""
        s = self._active(msg)
        if s is None:
            return None
        s.sent.append(msg.role)
        stamp = departure if s.phy else scheduled
        if msg.role in (Role.S1, Role.SYNC):
            s.t1 = stamp
            if s.phy:
                role = Role.FOLLOW_UP if msg.role is Role.SYNC else Role.F1
                return SyncMessage(role, s.session_id, s.unit, s.members, s.carriage, codec.ts_to_bytes(s.t1))
            s.phase = Phase.AWAIT_S2
        elif msg.role in (Role.F1, Role.FOLLOW_UP):
            s.phase = Phase.AWAIT_S2
        elif msg.role is Role.S3:
            s.t5 = stamp
            s.phase = Phase.SENT_S3
            if s.phy:
                body = _ts_body(s.carriage, s.compress, s.t5, s.t4)
                return SyncMessage(Role.F2, s.session_id, s.unit, s.members, s.carriage, body)
        return None

    def on_uplink(self, msg: SyncMessage, arrival: int) -> Optional[SyncMessage]:
        """Handle S2 / Delay_Req; returns S3 / Delay_Resp carrying T4."""
        s = self._active(msg)
        if s is None or s.phase is not Phase.AWAIT_S2:
            return None
        s.t4 = arrival
        if msg.role is Role.DELAY_REQ:
            s.phase = Phase.COMPLETE
            return SyncMessage(Role.DELAY_RESP, s.session_id, s.unit, s.members, s.carriage, codec.ts_to_bytes(arrival))
        for ue_id, b in msg.entries:
            s.sqi[ue_id] = b[0]
        if not msg.entries and msg.body:
            s.sqi[msg.members[0]] = msg.body[0]
        present = tuple(ue for ue, _ in msg.entries) or s.members
        s.members = present
        body = _ts_body(s.carriage, s.compress, s.t4, s.t1)
        return SyncMessage(Role.S3, s.session_id, s.unit, present, s.carriage, body)

    def s3_release_time(self, unit: int, now: int) -> int:
        """Earliest time S3 may be scheduled (S1 departure plus the configured hold)."""
        s = self.sessions[unit]
        return max(now, (s.t1 or now) + self.s3_hold_ns)

    def close(self, unit: int) -> Optional[BsSession]:
        return self.sessions.pop(unit, None)


def bs_initiate(bs: BsAgent, ue: int, policy: SyncPolicy, scheme: Carriage, now: int,
                phy: bool = True, compress: bool = True) -> Optional[SyncMessage]:
    """Open a session for ``ue``; a second call while one is active is coalesced."""
    return bs.initiate(ue, (ue,), scheme, now, now + 4 * policy.timeliness_target, phy, compress)


# --------------------------------------------------------------------------
# UE side


@dataclass
class SessionStateMachine:
    ue_id: int
    session_id: int
    carriage: Carriage
    phy: bool
    compress: bool
    deadline: int
    sqi_level: int = 255
    role: str = "UE"
    phase: Phase = Phase.IDLE
    session: SyncSession = None
    dropped: int = 0
    received: list = field(default_factory=list)

    def __post_init__(self):
        if self.session is None:
            self.session = SyncSession(phy_timestamping=self.phy, session_id=self.session_id, ue_id=self.ue_id)

    @property
    def done(self) -> bool:
        return self.phase in (Phase.COMPLETE, Phase.FAILED)


_EXPECTED = {
    Role.S1: (Phase.IDLE,),
    Role.F1: (Phase.AWAIT_F1,),
    Role.S3: (Phase.AWAIT_S3,),
    Role.F2: (Phase.AWAIT_F2,),
    Role.SYNC: (Phase.IDLE,),
    Role.FOLLOW_UP: (Phase.AWAIT_F1,),
    Role.DELAY_RESP: (Phase.AWAIT_S3,),
}


def _s2(sm: SessionStateMachine, unit: int) -> SyncMessage:
    if sm.carriage is Carriage.PTP:
        return SyncMessage(Role.DELAY_REQ, sm.session_id, unit, (sm.ue_id,), sm.carriage, bytes(codec.TIMESTAMP_BYTES))
    level = bytes([sm.sqi_level])
    entries = ((sm.ue_id, level),) if sm.carriage is Carriage.AGG else ()
    return SyncMessage(Role.S2, sm.session_id, unit, (sm.ue_id,), sm.carriage, level, entries)


def ue_handle_dl(msg: SyncMessage, arrival_local: int, sm: SessionStateMachine,
                 scheduled_departure: Optional[int] = None, now: Optional[int] = None):
    """Advance the UE state machine on a downlink message.

    Returns ``(sm, s2, estimate)``: ``s2`` is the uplink message to send (or
    the UE's contribution to an aggregated S2), ``estimate`` is set once the
    session completes. Stale, foreign or out-of-order messages are counted
    in ``sm.dropped`` and ignored.
    """
    if now is not None and now > sm.deadline and not sm.done:
        sm.phase = Phase.FAILED
    if msg.session_id != sm.session_id or sm.done or sm.phase not in _EXPECTED.get(msg.role, ()):
        sm.dropped += 1
        return sm, None, None
    s = sm.session
    sm.received.append(msg.role)
    out = None
    est = None
    if msg.role in (Role.S1, Role.SYNC):
        s.t2 = arrival_local
        if sm.phy:
            sm.phase = Phase.AWAIT_F1
        else:
            s.t1 = scheduled_departure
            out = _s2(sm, msg.unit)
            sm.phase = Phase.AWAIT_S3
    elif msg.role in (Role.F1, Role.FOLLOW_UP):
        s.t1 = codec.ts_from_bytes(msg.body)
        out = _s2(sm, msg.unit)
        sm.phase = Phase.AWAIT_S3
    elif msg.role is Role.DELAY_RESP:
        s.t4 = codec.ts_from_bytes(msg.body)
        est = estimate_offset_two_way(s.t1, s.t2, s.t3, s.t4)
        sm.phase = Phase.COMPLETE
    elif msg.role is Role.S3:
        s.t6 = arrival_local
        s.t4 = _ts_value(msg.body, sm.compress, sm.carriage, s.t1)
        if sm.phy:
            sm.phase = Phase.AWAIT_F2
        else:
            s.t5 = scheduled_departure
            est = estimate_offset_skew(s)
            sm.phase = Phase.COMPLETE
    elif msg.role is Role.F2:
        s.t5 = _ts_value(msg.body, sm.compress, sm.carriage, s.t4)
        est = estimate_offset_skew(s)
        sm.phase = Phase.COMPLETE
    if est is not None and not est.valid:
        sm.phase = Phase.FAILED
    return sm, out, est


def ue_on_sent(sm: SessionStateMachine, departure_local: int) -> None:
    """Record T3 when the UE's S2 / Delay_Req leaves."""
    if not sm.done:
        sm.session.t3 = departure_local


def check_deadline(sm: SessionStateMachine, now: int) -> bool:
    """Fail an unfinished session whose deadline has passed; True if it failed now."""
    if not sm.done and now > sm.deadline:
        sm.phase = Phase.FAILED
        return True
    return False


def baseline_ptp_exchange(bs: BsAgent, ue: int, now: int, deadline: int) -> Optional[SyncMessage]:
    """Start a separated two-step PTP exchange; returns the Sync packet."""
    return bs.initiate(ue, (ue,), Carriage.PTP, now, deadline, phy=True, compress=False)


MESSAGES_PER_SESSION = {("isync", True): 5, ("isync", False): 3, ("ptp", True): 4}
