import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from isync.codec import (
    CeType,
    CompressedTimestamp,
    DecodeError,
    EncodeError,
    IsyncCe,
    LCID_ISYNC_AGG,
    LCID_ISYNC_CE,
    LCID_PADDING,
    MacPdu,
    SubPdu,
    Subheader,
    aggregate_size,
    ce_compressed,
    ce_subpdu,
    ce_sqi,
    ce_sync_flag,
    ce_t1,
    compress_timestamp,
    decode_aggregate,
    decode_ce,
    decode_pdu,
    decompress_timestamp,
    encode_aggregate,
    encode_pdu,
    isync_sdu,
    sdu_subpdu,
    sdu_timestamp,
    standalone_size,
)
from isync.sim import Direction

FIXTURES = Path(__file__).parent / "fixtures"


def test_fig3b_timestamp_sdu():
    pdu = MacPdu([isync_sdu(sdu_timestamp(1))])
    raw = encode_pdu(pdu)
    assert len(raw) == 10
    # R=0 F=0 LCID=29 -> 0b00011101, L=8
    assert raw[0] == 0x1D
    assert raw[1] == 8
    assert raw[2:] == (1).to_bytes(8, "big")
    assert decode_pdu(raw) == pdu


def test_empty_pdu():
    assert encode_pdu(MacPdu()) == b""
    assert decode_pdu(b"") == MacPdu()


def test_truncated_payload_reports_index_zero():
    raw = encode_pdu(MacPdu([isync_sdu(sdu_timestamp(1))]))
    with pytest.raises(DecodeError) as exc:
        decode_pdu(raw[:6])
    assert exc.value.index == 0


def test_error_names_offending_subpdu():
    raw = encode_pdu(MacPdu([sdu_subpdu(3, b"abc"), sdu_subpdu(4, b"defg")]))
    with pytest.raises(DecodeError) as exc:
        decode_pdu(raw[:-1])
    assert exc.value.index == 1
    with pytest.raises(DecodeError) as exc:
        decode_pdu(raw + bytes([0x20]))  # LCID 32 is unassigned
    assert exc.value.index == 2


def test_length_mismatch_rejected():
    bad = SubPdu(Subheader(5, 3), b"ab")
    with pytest.raises(EncodeError):
        encode_pdu(MacPdu([bad]))
    with pytest.raises(EncodeError):
        encode_pdu(MacPdu([SubPdu(Subheader(5, 300, 0), bytes(300))]))


def test_ce_sizes_follow_table():
    assert ce_subpdu(ce_sync_flag()).size == 2
    assert ce_subpdu(ce_sqi(200)).size == 3
    assert ce_subpdu(ce_t1(123)).size == 10
    for n in range(1, 9):
        c = CompressedTimestamp(n, 0)
        assert ce_subpdu(ce_compressed(CeType.S3, c)).size == 2 + n
        assert ce_subpdu(ce_compressed(CeType.F2, c)).size == 2 + n


def test_ces_not_larger_than_full_timestamp_sdu():
    sdu = isync_sdu(sdu_timestamp(0)).size
    assert ce_subpdu(ce_t1(0)).size <= sdu
    for ce in (ce_sync_flag(), ce_sqi(1), ce_compressed(CeType.S3, CompressedTimestamp(7, 0))):
        assert ce_subpdu(ce).size < sdu


def test_ce_type_mapping():
    labels = {t.name: t.label for t in CeType}
    assert labels == {"S1": "DL-00", "F1": "DL-01", "S2": "UL-00", "S3": "DL-10", "F2": "DL-11"}
    assert len({(t.direction, t.type_bits) for t in CeType}) == 5


def test_dl00_and_ul00_disambiguated_by_direction():
    flag = ce_subpdu(ce_sync_flag())
    sqi = ce_subpdu(ce_sqi(0))
    assert flag.payload[0] >> 6 == sqi.payload[0] >> 6 == 0
    assert decode_ce(flag.payload, Direction.DL).kind is CeType.S1
    assert decode_ce(sqi.payload, Direction.UL).kind is CeType.S2
    with pytest.raises(ValueError):
        decode_ce(bytes([0x40]), Direction.UL)  # UL-01 is unassigned


def test_golden_vectors():
    cases = {}
    for line in (FIXTURES / "golden_vectors.txt").read_text().splitlines():
        if line and not line.startswith("#"):
            name, direction, hexstr = line.split()
            cases[name] = (Direction(direction), bytes.fromhex(hexstr))
    built = {
        "sdu_timestamp_1": MacPdu([isync_sdu(sdu_timestamp(1))]),
        "ce_s1": MacPdu([ce_subpdu(ce_sync_flag())]),
        "ce_f1": MacPdu([ce_subpdu(ce_t1(0x0102030405060708))]),
        "ce_s2": MacPdu([ce_subpdu(ce_sqi(0x7F))]),
        "ce_s3_2byte": MacPdu([ce_subpdu(ce_compressed(CeType.S3, CompressedTimestamp(2, 0x7530)))]),
        "ce_f2_3byte": MacPdu([ce_subpdu(ce_compressed(CeType.F2, CompressedTimestamp(3, 0x0A0B0C)))]),
        "comm_long_plus_ce": MacPdu([sdu_subpdu(4, b"\xAA" * 300), ce_subpdu(ce_sync_flag())]),
        "aggregate_two": MacPdu([sdu_subpdu(LCID_ISYNC_AGG, encode_aggregate([(1, b"\x05"), (258, b"\x06")]))]),
        "padding_tail": MacPdu([sdu_subpdu(1, b"hi"), SubPdu(Subheader(LCID_PADDING), bytes(3))]),
    }
    assert set(built) == set(cases)
    for name, pdu in built.items():
        direction, raw = cases[name]
        assert encode_pdu(pdu, direction) == raw, name
        assert decode_pdu(raw, direction) == pdu, name


def test_fixed_bit_layout_of_ces():
    # hand-derived: LCID 30 subheader 0x1E; S3 type octet 10 001 000 for 2 bytes
    assert encode_pdu(MacPdu([ce_subpdu(ce_compressed(CeType.S3, CompressedTimestamp(2, 0x7530)))])) == bytes.fromhex("1e887530")
    assert encode_pdu(MacPdu([ce_subpdu(ce_sqi(0x7F))]), Direction.UL) == bytes.fromhex("1e007f")


# --------------------------------------------------------------------------
# fuzzing


def random_subpdu(rnd: random.Random, direction: Direction) -> SubPdu:
    r = rnd.random()
    if r < 0.35:
        n = rnd.choice((0, 1, 8, rnd.randrange(0, 300)))
        return sdu_subpdu(rnd.randrange(1, 29), rnd.randbytes(n), long_length=rnd.random() < 0.2)
    if r < 0.5:
        return isync_sdu(sdu_timestamp(rnd.randrange(-(1 << 63), 1 << 63)))
    if r < 0.6:
        n = rnd.randrange(1, 64)
        w = rnd.randrange(0, 9)
        entries = [(rnd.randrange(1 << 16), rnd.randbytes(w)) for _ in range(n)]
        return sdu_subpdu(LCID_ISYNC_AGG, encode_aggregate(entries, rnd.randrange(4)))
    if direction is Direction.UL:
        return ce_subpdu(ce_sqi(rnd.randrange(256)))
    kind = rnd.choice(list(CeType)[:4])
    if kind is CeType.S1:
        ce = ce_sync_flag()
    elif kind is CeType.F1:
        ce = ce_t1(rnd.randrange(-(1 << 63), 1 << 63))
    else:
        n = rnd.randrange(1, 9)
        ce = ce_compressed(kind, CompressedTimestamp(n, rnd.randrange(1 << (8 * n))))
    sp = ce_subpdu(ce)
    if rnd.random() < 0.1:
        sp = SubPdu(Subheader(LCID_ISYNC_CE, None, 0, 1), sp.payload)
    return sp


def random_pdu(rnd: random.Random, direction: Direction) -> MacPdu:
    subs = [random_subpdu(rnd, direction) for _ in range(rnd.randrange(0, 17))]
    if subs and rnd.random() < 0.2:
        subs[-1] = SubPdu(Subheader(LCID_PADDING), bytes(rnd.randrange(0, 20)))
    return MacPdu(subs)


def fuzz_roundtrip(n_cases: int, seed: int = 1234) -> int:
    rnd = random.Random(seed)
    for i in range(n_cases):
        direction = Direction.UL if i % 4 == 3 else Direction.DL
        pdu = random_pdu(rnd, direction)
        raw = encode_pdu(pdu, direction)
        assert len(raw) == pdu.size
        assert decode_pdu(raw, direction) == pdu, i
    return n_cases


def fuzz_totality(n_cases: int, seed: int = 99) -> dict:
    rnd = random.Random(seed)
    outcome = {"pdu": 0, "error": 0}
    for i in range(n_cases):
        raw = rnd.randbytes(rnd.randrange(0, 64))
        try:
            decode_pdu(raw, Direction.UL if i & 1 else Direction.DL)
            outcome["pdu"] += 1
        except DecodeError:
            outcome["error"] += 1
    return outcome


def test_fuzz_roundtrip_small():
    assert fuzz_roundtrip(3000) == 3000


def test_fuzz_totality_small():
    out = fuzz_totality(5000)
    assert out["pdu"] + out["error"] == 5000
    assert out["pdu"] > 0 and out["error"] > 0


# --------------------------------------------------------------------------
# aggregation arithmetic


def test_aggregate_roundtrip():
    entries = [(7, b"\x01\x02"), (9, b"\x03\x04")]
    assert decode_aggregate(encode_aggregate(entries, 2)) == (2, entries)
    with pytest.raises(EncodeError):
        encode_aggregate([])
    with pytest.raises(EncodeError):
        encode_aggregate([(1, b"a"), (2, b"bc")])


def test_ten_member_aggregate_bytes():
    entries = [(i, bytes(8)) for i in range(10)]
    agg = sdu_subpdu(LCID_ISYNC_AGG, encode_aggregate(entries))
    assert agg.size == 2 + 1 + 10 * (2 + 8) == aggregate_size(10, 8)
    standalone = sum(isync_sdu(sdu_timestamp(0)).size for _ in range(10))
    assert standalone == standalone_size(10, 8) == 100
    # with bare 2-byte subheaders the member ids cost more than the headers saved
    assert standalone - agg.size == 10 * 2 - (1 + 10 * 2) - 2


# --------------------------------------------------------------------------
# timestamp compression


def test_compress_equal_reference():
    assert compress_timestamp(123, 123).n_bytes == 1


def test_compress_two_bytes():
    c = compress_timestamp(1_000_030_000, 1_000_000_000)
    assert c.n_bytes == 2
    assert c.suffix == 1_000_030_000 & 0xFFFF
    assert decompress_timestamp(c, 1_000_000_000) == 1_000_030_000


def test_compress_delta_2_pow_40():
    assert compress_timestamp(2**40, 0).n_bytes == 6


def test_wrap_boundary_carry():
    ref = 0x12340000FFFF
    full = ref + 2
    c = compress_timestamp(full, ref)
    assert c.n_bytes == 1
    assert decompress_timestamp(c, ref) == full


@settings(max_examples=2000, deadline=None)
@given(r=st.integers(-(2**62), 2**62), delta=st.integers(-(2**31) + 1, 2**31 - 1))
def test_compress_roundtrip_property(r, delta):
    c = compress_timestamp(r + delta, r)
    assert decompress_timestamp(c, r) == r + delta


@settings(max_examples=500, deadline=None)
@given(r=st.integers(-(2**62), 2**62), delta=st.integers(-(2**55) + 1, 2**55 - 1))
def test_compressed_below_eight_bytes(r, delta):
    assert compress_timestamp(r + delta, r).n_bytes < 8


def test_full_width_is_always_valid():
    for x, r in ((2**62, -(2**62)), (-(2**63), 2**63 - 1)):
        c = compress_timestamp(x, r)
        assert c.n_bytes == 8
        assert decompress_timestamp(c, r) == x


def test_ce_encode_rejects_wrong_content():
    with pytest.raises(EncodeError):
        IsyncCe(CeType.F1, b"\x00")
    with pytest.raises(EncodeError):
        IsyncCe(CeType.S3, b"")
