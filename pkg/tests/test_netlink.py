import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rehabsim.netlink import (
    BROADCAST,
    BadCrc,
    BadSof,
    ClockRegression,
    Delivery,
    Frame,
    Hub,
    LinkConfig,
    MsgType,
    PayloadTooLong,
    Truncated,
    UnknownDestination,
    UnknownType,
    crc16,
    decode_frame,
    encode_frame,
)

# Frozen on 2026-08-19 from an independent bit-serial CRC implementation.
GOLDEN_HEARTBEAT = bytes.fromhex("a5 07 00 00 01 02 00 00 5e f0")


def crc_bitwise(data: bytes) -> int:
    """Oracle: bit-at-a-time CRC-16/CCITT-FALSE, no lookup table."""
    crc = 0xFFFF
    for b in data:
        crc ^= b << 8
        for _ in range(8):
            crc = ((crc << 1) ^ 0x1021) & 0xFFFF if crc & 0x8000 else (crc << 1) & 0xFFFF
    return crc


class TestCrc16:
    def test_empty_is_init_value(self):
        assert crc16(b"") == 0xFFFF

    def test_standard_check_value(self):
        assert crc16(b"123456789") == 0x29B1

    @given(st.binary(max_size=300))
    def test_matches_bitwise_oracle(self, data):
        assert crc16(data) == crc_bitwise(data)

    def test_single_bit_change_never_collides(self):
        corpus = [b"", b"\x00", b"abc", bytes(range(64)), b"\xff" * 20]
        for data in corpus:
            base = crc16(data)
            for i in range(len(data) * 8):
                flipped = bytearray(data)
                flipped[i // 8] ^= 1 << (i % 8)
                assert crc16(bytes(flipped)) != base


frames_st = st.builds(
    Frame,
    msg_type=st.sampled_from(list(MsgType)),
    seq=st.integers(0, 0xFFFF),
    src=st.integers(0, 0xFE),
    dst=st.integers(0, 0xFF),
    payload=st.binary(max_size=256),
)


class TestFrameCodec:
    def test_golden_heartbeat_bytes(self):
        frame = Frame(MsgType.HEARTBEAT, seq=0, src=1, dst=2)
        assert encode_frame(frame) == GOLDEN_HEARTBEAT
        assert len(GOLDEN_HEARTBEAT) == 10
        assert GOLDEN_HEARTBEAT[0] == 0xA5
        assert GOLDEN_HEARTBEAT[1] == 0x07

    def test_golden_decodes(self):
        f = decode_frame(GOLDEN_HEARTBEAT)
        assert f == Frame(MsgType.HEARTBEAT, 0, 1, 2, b"")

    def test_payload_too_long(self):
        with pytest.raises(PayloadTooLong):
            Frame(MsgType.GAME_EVENT, 0, 3, 0, b"\x00" * 257)

    def test_bad_sof(self):
        data = b"\x00" + GOLDEN_HEARTBEAT[1:]
        with pytest.raises(BadSof):
            decode_frame(data)

    def test_truncated(self):
        with pytest.raises(Truncated):
            decode_frame(b"")
        with pytest.raises(Truncated):
            decode_frame(GOLDEN_HEARTBEAT[:4])
        with pytest.raises(Truncated):
            decode_frame(GOLDEN_HEARTBEAT[:-1])
        with pytest.raises(Truncated):
            decode_frame(GOLDEN_HEARTBEAT + b"\x00")

    def test_unknown_type_with_valid_crc(self):
        import struct

        from rehabsim.netlink import SOF

        body = struct.pack("<BHBBH", 0x42, 1, 1, 2, 0)
        data = bytes([SOF]) + body + struct.pack("<H", crc16(body))
        with pytest.raises(UnknownType):
            decode_frame(data)

    def test_flip_any_payload_bit_is_bad_crc(self):
        frame = Frame(MsgType.GAME_EVENT, 7, 3, 0, b"score=12")
        wire = encode_frame(frame)
        payload_start = 8
        for i in range(payload_start * 8, (payload_start + 8) * 8):
            corrupted = bytearray(wire)
            corrupted[i // 8] ^= 1 << (i % 8)
            with pytest.raises(BadCrc):
                decode_frame(bytes(corrupted))

    def test_every_single_bit_flip_detected(self):
        frame = Frame(MsgType.EMG_FILTERED, 512, 1, 0, bytes(range(16)))
        wire = encode_frame(frame)
        for i in range(len(wire) * 8):
            corrupted = bytearray(wire)
            corrupted[i // 8] ^= 1 << (i % 8)
            with pytest.raises((BadSof, Truncated, BadCrc)):
                decode_frame(bytes(corrupted))

    @given(frames_st)
    def test_round_trip_identity(self, frame):
        assert decode_frame(encode_frame(frame)) == frame

    @given(frames_st)
    def test_wire_size(self, frame):
        assert len(encode_frame(frame)) == 10 + len(frame.payload)
        assert frame.wire_size == 10 + len(frame.payload)

    def test_seq_bounds(self):
        with pytest.raises(ValueError):
            Frame(MsgType.HEARTBEAT, 0x10000, 1, 2)


def small_frame(seq=0, src=1, dst=2, n=0):
    return Frame(MsgType.HEARTBEAT, seq, src, dst, b"\x00" * n)


class TestHubTransport:
    def test_fixed_latency_exact_delivery(self):
        hub = Hub(LinkConfig(latency_ms=5), nodes=[1, 2])
        hub.send(small_frame(), now_ms=0)
        for t in range(5):
            assert hub.step(t) == []
        out = hub.step(5)
        assert [d.recipient for d in out] == [2]
        assert out[0].t_ms == 5

    def test_total_loss(self):
        hub = Hub(LinkConfig(loss_prob=1.0), nodes=[1, 2])
        for i in range(20):
            hub.send(small_frame(seq=i), now_ms=i)
        assert all(hub.step(t) == [] for t in range(100))
        assert hub.frames_dropped == 20
        assert hub.frames_delivered == 0

    def test_send_order_preserved_without_loss(self):
        hub = Hub(LinkConfig(latency_ms=1), nodes=[1, 2])
        for i in range(100):
            hub.send(small_frame(seq=i), now_ms=0)
        seqs = []
        for t in range(0, 200):
            seqs.extend(d.frame.seq for d in hub.step(t))
        assert seqs == list(range(100))

    def test_per_pair_fifo_under_jitter(self):
        hub = Hub(LinkConfig(latency_ms=2, jitter_ms=50, seed=99), nodes=[1, 2, 3])
        for i in range(60):
            hub.send(small_frame(seq=i, src=1, dst=2), now_ms=i)
            hub.send(small_frame(seq=i, src=1, dst=3), now_ms=i)
        got: dict[int, list[int]] = {2: [], 3: []}
        for t in range(0, 400):
            for d in hub.step(t):
                got[d.recipient].append(d.frame.seq)
        assert got[2] == list(range(60))
        assert got[3] == list(range(60))

    def test_same_deliver_at_released_in_send_order(self):
        hub = Hub(LinkConfig(latency_ms=3), nodes=[1, 2])
        hub.send(small_frame(seq=0), now_ms=0)
        hub.send(small_frame(seq=1), now_ms=0)
        hub.step(2)
        out = hub.step(3)
        assert [d.frame.seq for d in out] == [0, 1]

    def test_rate_limit_paces_burst(self):
        # 1152 bytes of traffic over a 115200-baud link needs >= 100 ms
        hub = Hub(LinkConfig(latency_ms=0), nodes=[1, 2])
        n_frames, payload = 8, 134  # 8 * (134 + 10) = 1152 bytes
        for i in range(n_frames):
            hub.send(small_frame(seq=i, n=payload), now_ms=0)
        done_at = None
        delivered = 0
        for t in range(0, 500):
            delivered += len(hub.step(t))
            if delivered == n_frames:
                done_at = t
                break
        assert done_at is not None
        assert done_at >= 100

    def test_throughput_bound_over_window(self):
        hub = Hub(LinkConfig(latency_ms=0), nodes=[1, 2])
        sent = 0
        delivered_bytes = 0
        for t in range(0, 10_000):
            if sent < 2000:
                hub.send(small_frame(seq=sent % 65536, n=100), now_ms=t)
                sent += 1
            for d in hub.step(t):
                delivered_bytes += d.frame.wire_size
        budget = 11_520 * 10.0 + 266
        assert delivered_bytes <= budget

    def test_clock_regression(self):
        hub = Hub(LinkConfig(), nodes=[1, 2])
        hub.step(10)
        with pytest.raises(ClockRegression):
            hub.step(9)

    def test_broadcast_fans_out_except_sender(self):
        # each copy is charged to the byte budget, so the fan-out is paced
        hub = Hub(LinkConfig(latency_ms=1), nodes=[0, 1, 2, 3])
        hub.send(small_frame(src=1, dst=BROADCAST), now_ms=0)
        out = []
        for t in range(1, 6):
            out.extend(hub.step(t))
        assert sorted(d.recipient for d in out) == [0, 2, 3]
        assert all(d.frame.dst == BROADCAST for d in out)

    def test_unknown_destination(self):
        hub = Hub(LinkConfig(), nodes=[1, 2])
        with pytest.raises(UnknownDestination):
            hub.send(small_frame(dst=9), now_ms=0)

    def test_unregistered_source(self):
        hub = Hub(LinkConfig(), nodes=[2])
        with pytest.raises(ValueError):
            hub.send(small_frame(src=1), now_ms=0)

    def test_empty_step(self):
        hub = Hub(LinkConfig(), nodes=[1, 2])
        assert hub.step(0) == []

    def test_deterministic_for_seed(self):
        def run(seed):
            hub = Hub(LinkConfig(latency_ms=2, jitter_ms=20, loss_prob=0.3, seed=seed), nodes=[1, 2])
            for i in range(200):
                hub.send(small_frame(seq=i, n=i % 50), now_ms=i)
            trace = []
            for t in range(0, 600):
                trace.extend((d.t_ms, d.frame.seq) for d in hub.step(t))
            return trace

        assert run(5) == run(5)
        assert run(5) != run(6)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            LinkConfig(baud=0)
        with pytest.raises(ValueError):
            LinkConfig(loss_prob=1.5)
        with pytest.raises(ValueError):
            LinkConfig(latency_ms=-1)

    @given(
        seed=st.integers(0, 2**16),
        jitter=st.integers(0, 30),
        sends=st.integers(1, 80),
    )
    @settings(max_examples=25, deadline=None)
    def test_fifo_property_with_random_jitter(self, seed, jitter, sends):
        hub = Hub(LinkConfig(latency_ms=1, jitter_ms=jitter, seed=seed), nodes=[1, 2])
        for i in range(sends):
            hub.send(small_frame(seq=i), now_ms=i)
        seqs = []
        for t in range(0, sends + jitter + 200):
            seqs.extend(d.frame.seq for d in hub.step(t))
        assert seqs == list(range(sends))
