"""Bit-exact MAC PDU codec for communication SDUs, ISynC SDUs and ISynC CEs.

Wire grammar (big-endian throughout)::

    sub-PDU   := subheader payload
    subheader := R(1) F(1) LCID(6) [L(8 if F=0 | 16 if F=1)]

Whether the L field is present is decided by the LCID table: variable-size
SDU channels carry it, the ISynC CE channel is self-sized through its type
octet, and padding runs to the end of the PDU.

ISynC CE payload::

    type octet := TYPE(2) NBYTES-1(3) RESERVED(3)     # compressed T4/T5
                | TYPE(2) RESERVED(6)                  # all other types
    content    := per (direction, TYPE) below

    DL-00 S1 sync flag      (empty)
    DL-01 F1 T1             (8 bytes)
    UL-00 S2 SQI            (1 byte)
    DL-10 S3 compressed T4  (NBYTES bytes)
    DL-11 F2 compressed T5  (NBYTES bytes)

Aggregated ISynC SDU body::

    TYPE(2) COUNT(6) { UE_ID(16) payload }*COUNT       # equal-width payloads
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .sim import Direction

LCID_ISYNC_SDU = 29
LCID_ISYNC_CE = 30
LCID_ISYNC_AGG = 31
LCID_PADDING = 63
COMM_LCIDS = range(1, 29)

TIMESTAMP_BYTES = 8
MEMBER_ID_BYTES = 2
MAX_AGG_MEMBERS = 63


class LcidKind(str, enum.Enum):
    SDU = "sdu"
    CE = "ce"
    PADDING = "padding"


def default_lcid_table(ce_lcid: int = LCID_ISYNC_CE) -> dict[int, LcidKind]:
    table = {lcid: LcidKind.SDU for lcid in COMM_LCIDS}
    table[LCID_ISYNC_SDU] = LcidKind.SDU
    table[LCID_ISYNC_AGG] = LcidKind.SDU
    table[ce_lcid] = LcidKind.CE
    table[LCID_PADDING] = LcidKind.PADDING
    return table


DEFAULT_LCID_TABLE = default_lcid_table()


class EncodeError(ValueError):
    pass


class DecodeError(ValueError):
    def __init__(self, index: int, reason: str):
        super().__init__(f"sub-PDU {index}: {reason}")
        self.index = index
        self.reason = reason


# --------------------------------------------------------------------------
# containers


@dataclass(frozen=True)
class Subheader:
    lcid: int
    length: Optional[int] = None
    f_bit: int = 0
    r_bit: int = 0

    @property
    def size(self) -> int:
        if self.length is None:
            return 1
        return 3 if self.f_bit else 2


@dataclass(frozen=True)
class SubPdu:
    subheader: Subheader
    payload: bytes = b""

    @property
    def size(self) -> int:
        return self.subheader.size + len(self.payload)


@dataclass
class MacPdu:
    subpdus: list[SubPdu] = field(default_factory=list)

    @property
    def size(self) -> int:
        return sum(s.size for s in self.subpdus)


def sdu_subpdu(lcid: int, payload: bytes, long_length: bool = False) -> SubPdu:
    f_bit = 1 if long_length or len(payload) > 0xFF else 0
    return SubPdu(Subheader(lcid, len(payload), f_bit), bytes(payload))


def sdu_header_size(payload_len: int, long_length: bool = False) -> int:
    return 3 if long_length or payload_len > 0xFF else 2


# --------------------------------------------------------------------------
# ISynC control elements


class CeType(enum.Enum):
    S1 = (Direction.DL, 0b00)
    F1 = (Direction.DL, 0b01)
    S3 = (Direction.DL, 0b10)
    F2 = (Direction.DL, 0b11)
    S2 = (Direction.UL, 0b00)

    @property
    def direction(self) -> Direction:
        return self.value[0]

    @property
    def type_bits(self) -> int:
        return self.value[1]

    @property
    def label(self) -> str:
        return f"{self.direction.value}-{self.type_bits:02b}"


_CE_BY_KEY = {t.value: t for t in CeType}
COMPRESSED_TYPES = (CeType.S3, CeType.F2)


@dataclass(frozen=True)
class IsyncCe:
    kind: CeType
    content: bytes = b""

    def __post_init__(self):
        n = len(self.content)
        if self.kind is CeType.S1 and n != 0:
            raise EncodeError("S1 carries no content")
        if self.kind is CeType.F1 and n != TIMESTAMP_BYTES:
            raise EncodeError("F1 carries a full 8-byte timestamp")
        if self.kind is CeType.S2 and n != 1:
            raise EncodeError("S2 carries a 1-byte SQI")
        if self.kind in COMPRESSED_TYPES and not 1 <= n <= 8:
            raise EncodeError("compressed timestamp must be 1..8 bytes")

    def encode(self) -> bytes:
        octet = self.kind.type_bits << 6
        if self.kind in COMPRESSED_TYPES:
            octet |= (len(self.content) - 1) << 3
        return bytes([octet]) + self.content

    @property
    def size(self) -> int:
        return 1 + len(self.content)


def ce_content_length(direction: Direction, octet: int) -> int:
    """Content bytes following a CE type octet; raises ValueError if invalid."""
    kind = _CE_BY_KEY.get((direction, octet >> 6))
    if kind is None:
        raise ValueError(f"unassigned CE type {direction.value}-{octet >> 6:02b}")
    if kind in COMPRESSED_TYPES:
        if octet & 0b111:
            raise ValueError("reserved CE bits set")
        return ((octet >> 3) & 0b111) + 1
    if octet & 0x3F:
        raise ValueError("reserved CE bits set")
    return {CeType.S1: 0, CeType.F1: TIMESTAMP_BYTES, CeType.S2: 1}[kind]


def decode_ce(payload: bytes, direction: Direction) -> IsyncCe:
    if not payload:
        raise ValueError("empty CE payload")
    octet = payload[0]
    n = ce_content_length(direction, octet)
    if len(payload) != 1 + n:
        raise ValueError("CE payload length does not match its type octet")
    return IsyncCe(_CE_BY_KEY[(direction, octet >> 6)], bytes(payload[1:]))


def ce_subpdu(ce: IsyncCe, lcid: int = LCID_ISYNC_CE) -> SubPdu:
    return SubPdu(Subheader(lcid, None), ce.encode())


def ce_sync_flag() -> IsyncCe:
    return IsyncCe(CeType.S1)


def ce_t1(t1: int) -> IsyncCe:
    return IsyncCe(CeType.F1, ts_to_bytes(t1))


def ce_sqi(level: int) -> IsyncCe:
    return IsyncCe(CeType.S2, bytes([level]))


def ce_compressed(kind: CeType, c: "CompressedTimestamp") -> IsyncCe:
    if kind not in COMPRESSED_TYPES:
        raise EncodeError(f"{kind.name} does not carry a compressed timestamp")
    return IsyncCe(kind, c.suffix_bytes())


# --------------------------------------------------------------------------
# ISynC SDU payloads (LCID 29). The body is interpreted by session context.


class SduKind(str, enum.Enum):
    TIMESTAMP = "timestamp"
    FEEDBACK = "feedback"
    SQI = "sqi"


@dataclass(frozen=True)
class IsyncSduPayload:
    msg_kind: SduKind
    body: bytes = b""

    def __post_init__(self):
        if self.msg_kind is SduKind.TIMESTAMP and not 1 <= len(self.body) <= 8:
            raise EncodeError("timestamp body must be 1..8 bytes")
        if self.msg_kind is SduKind.SQI and len(self.body) != 1:
            raise EncodeError("SQI body is one byte")


def isync_sdu(payload: IsyncSduPayload, lcid: int = LCID_ISYNC_SDU) -> SubPdu:
    return sdu_subpdu(lcid, payload.body)


def sdu_timestamp(ts: int) -> IsyncSduPayload:
    return IsyncSduPayload(SduKind.TIMESTAMP, ts_to_bytes(ts))


# --------------------------------------------------------------------------
# aggregated SDUs


def encode_aggregate(entries: list[tuple[int, bytes]], type_bits: int = 0) -> bytes:
    if not entries:
        raise EncodeError("aggregate needs at least one member")
    if len(entries) > MAX_AGG_MEMBERS:
        raise EncodeError(f"aggregate holds at most {MAX_AGG_MEMBERS} members")
    width = len(entries[0][1])
    out = bytearray([(type_bits & 0b11) << 6 | len(entries)])
    for ue_id, payload in entries:
        if len(payload) != width:
            raise EncodeError("aggregated payloads must share one width")
        if not 0 <= ue_id <= 0xFFFF:
            raise EncodeError("member id exceeds 16 bits")
        out += ue_id.to_bytes(MEMBER_ID_BYTES, "big") + payload
    return bytes(out)


def decode_aggregate(body: bytes) -> tuple[int, list[tuple[int, bytes]]]:
    if not body:
        raise ValueError("empty aggregate")
    count = body[0] & 0x3F
    if count == 0:
        raise ValueError("aggregate with zero members")
    rest = len(body) - 1
    if rest % count:
        raise ValueError("aggregate body not divisible by member count")
    width = rest // count - MEMBER_ID_BYTES
    if width < 0:
        raise ValueError("aggregate too short for member ids")
    entries = []
    pos = 1
    for _ in range(count):
        ue_id = int.from_bytes(body[pos:pos + 2], "big")
        entries.append((ue_id, bytes(body[pos + 2:pos + 2 + width])))
        pos += 2 + width
    return body[0] >> 6, entries


def aggregate_size(n_members: int, payload_len: int, header: int = 2) -> int:
    """Encoded size of one aggregated sub-PDU with ``header`` bytes of per-SDU header."""
    return header + 1 + n_members * (MEMBER_ID_BYTES + payload_len)


def standalone_size(n_members: int, payload_len: int, header: int = 2) -> int:
    return n_members * (header + payload_len)


# --------------------------------------------------------------------------
# PDU encode / decode


def encode_pdu(pdu: MacPdu, direction: Direction = Direction.DL,
               table: Mapping[int, LcidKind] = DEFAULT_LCID_TABLE) -> bytes:
    out = bytearray()
    last = len(pdu.subpdus) - 1
    for i, sp in enumerate(pdu.subpdus):
        sh = sp.subheader
        if not 0 <= sh.lcid <= 63:
            raise EncodeError(f"sub-PDU {i}: LCID {sh.lcid} out of range")
        if sh.r_bit not in (0, 1) or sh.f_bit not in (0, 1):
            raise EncodeError(f"sub-PDU {i}: R/F bits must be 0 or 1")
        kind = table.get(sh.lcid)
        if kind is None:
            raise EncodeError(f"sub-PDU {i}: LCID {sh.lcid} not in table")
        out.append(sh.r_bit << 7 | sh.f_bit << 6 | sh.lcid)
        if kind is LcidKind.SDU:
            if sh.length is None or sh.length != len(sp.payload):
                raise EncodeError(f"sub-PDU {i}: length field does not match payload")
            if sh.f_bit == 0:
                if sh.length > 0xFF:
                    raise EncodeError(f"sub-PDU {i}: length {sh.length} needs F=1")
                out.append(sh.length)
            else:
                if sh.length > 0xFFFF:
                    raise EncodeError(f"sub-PDU {i}: length {sh.length} overflows 16 bits")
                out += sh.length.to_bytes(2, "big")
        elif sh.length is not None:
            raise EncodeError(f"sub-PDU {i}: LCID {sh.lcid} carries no length field")
        elif kind is LcidKind.CE:
            if sh.f_bit:
                raise EncodeError(f"sub-PDU {i}: CE subheader must have F=0")
            try:
                decode_ce(sp.payload, direction)
            except ValueError as exc:
                raise EncodeError(f"sub-PDU {i}: {exc}") from None
        elif kind is LcidKind.PADDING:
            if i != last:
                raise EncodeError(f"sub-PDU {i}: padding must be last")
            if sh.f_bit:
                raise EncodeError(f"sub-PDU {i}: padding must have F=0")
        out += sp.payload
    return bytes(out)


def decode_pdu(data: bytes, direction: Direction = Direction.DL,
               table: Mapping[int, LcidKind] = DEFAULT_LCID_TABLE) -> MacPdu:
    """Parse ``data`` into sub-PDUs; any malformation raises :class:`DecodeError`."""
    data = bytes(data)
    subpdus = []
    pos = 0
    n = len(data)
    while pos < n:
        idx = len(subpdus)
        octet = data[pos]
        r_bit, f_bit, lcid = octet >> 7, (octet >> 6) & 1, octet & 0x3F
        kind = table.get(lcid)
        if kind is None:
            raise DecodeError(idx, f"unknown LCID {lcid}")
        pos += 1
        if kind is LcidKind.SDU:
            width = 2 if f_bit else 1
            if pos + width > n:
                raise DecodeError(idx, "truncated length field")
            length = int.from_bytes(data[pos:pos + width], "big")
            pos += width
            if pos + length > n:
                raise DecodeError(idx, f"length {length} overruns PDU")
            sp = SubPdu(Subheader(lcid, length, f_bit, r_bit), data[pos:pos + length])
            pos += length
        elif kind is LcidKind.CE:
            if pos >= n:
                raise DecodeError(idx, "truncated CE type octet")
            try:
                clen = ce_content_length(direction, data[pos])
            except ValueError as exc:
                raise DecodeError(idx, str(exc)) from None
            if f_bit:
                raise DecodeError(idx, "CE subheader must have F=0")
            end = pos + 1 + clen
            if end > n:
                raise DecodeError(idx, "truncated CE content")
            sp = SubPdu(Subheader(lcid, None, 0, r_bit), data[pos:end])
            pos = end
        else:
            if f_bit:
                raise DecodeError(idx, "padding subheader must have F=0")
            sp = SubPdu(Subheader(lcid, None, 0, r_bit), data[pos:])
            pos = n
        subpdus.append(sp)
    return MacPdu(subpdus)


# --------------------------------------------------------------------------
# timestamps


def ts_to_bytes(ts: int) -> bytes:
    return int(ts).to_bytes(TIMESTAMP_BYTES, "big", signed=True)


def ts_from_bytes(b: bytes) -> int:
    return int.from_bytes(b, "big", signed=True)


@dataclass(frozen=True)
class CompressedTimestamp:
    n_bytes: int
    suffix: int

    def __post_init__(self):
        if not 1 <= self.n_bytes <= 8:
            raise ValueError("n_bytes must be 1..8")
        if not 0 <= self.suffix < 1 << (8 * self.n_bytes):
            raise ValueError("suffix wider than n_bytes")

    def suffix_bytes(self) -> bytes:
        return self.suffix.to_bytes(self.n_bytes, "big")

    @classmethod
    def from_bytes(cls, b: bytes) -> "CompressedTimestamp":
        return cls(len(b), int.from_bytes(b, "big"))


def compressed_width(full: int, reference: int) -> int:
    delta = abs(full - reference)
    for k in range(1, 8):
        if delta < 1 << (8 * k - 1):
            return k
    return 8


def compress_timestamp(full: int, reference: int, min_bytes: int = 1) -> CompressedTimestamp:
    """Keep only the low-order bytes of ``full`` that differ from ``reference``."""
    k = max(compressed_width(full, reference), min_bytes)
    return CompressedTimestamp(k, full & ((1 << (8 * k)) - 1))


def decompress_timestamp(c: CompressedTimestamp, reference: int) -> int:
    if c.n_bytes == 8:
        return ts_from_bytes(c.suffix_bytes())
    m = 1 << (8 * c.n_bytes)
    d = (c.suffix - reference) % m
    if d > m >> 1:
        d -= m
    return reference + d
