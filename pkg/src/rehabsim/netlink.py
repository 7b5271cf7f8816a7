"""Hub wire protocol and simulated transport.

One microcontroller hub routes framed messages among the EMG sensor,
exoskeleton, game, olfactory diffuser and operator console. The link is
modeled as an abstract framed serial channel: 115200 baud with 8-N-1
framing gives a budget of 11520 payload bytes per second, shared by all
traffic. Latency, jitter and loss are seeded so any network scenario
replays identically.

Wire layout (little-endian multi-byte fields):

    sof   1  0xA5
    type  1  MsgType code
    seq   2  per-sender counter, wraps mod 2^16
    src   1  node id
    dst   1  node id, 0xFF broadcast
    len   2  payload byte count, <= 256
    payload
    crc   2  CRC-16/CCITT-FALSE over type..payload

A frame therefore occupies 10 + len bytes on the wire.
"""
from __future__ import annotations

import heapq
import random
import struct
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple

SOF = 0xA5
MAX_PAYLOAD = 256
HEADER_LEN = 8  # sof..len
FRAME_OVERHEAD = 10  # header + crc
BROADCAST = 0xFF

# Well-known node ids.
NODE_HUB = 0
NODE_EMG = 1
NODE_EXO = 2
NODE_GAME = 3
NODE_OLFACTORY = 4
NODE_CONSOLE = 5


class LinkError(Exception):
    pass


class BadSof(LinkError):
    pass


class Truncated(LinkError):
    pass


class BadCrc(LinkError):
    pass


class UnknownType(LinkError):
    pass


class PayloadTooLong(LinkError):
    pass


class UnknownDestination(LinkError):
    pass


class ClockRegression(LinkError):
    pass


class MsgType(Enum):
    EMG_FILTERED = 1
    INTENT_EVENT = 2
    SERVO_CMD = 3
    SERVO_STATE = 4
    GAME_EVENT = 5
    SCENT_CMD = 6
    HEARTBEAT = 7
    MODE_SET = 8
    STAGE_CTL = 9


_CRC_TABLE = []
for _byte in range(256):
    _r = _byte << 8
    for _ in range(8):
        _r = ((_r << 1) ^ 0x1021 if _r & 0x8000 else _r << 1) & 0xFFFF
    _CRC_TABLE.append(_r)


def crc16(data: bytes) -> int:
    """CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection or xor-out."""
    crc = 0xFFFF
    for b in data:
        crc = ((crc << 8) & 0xFFFF) ^ _CRC_TABLE[(crc >> 8) ^ b]
    return crc


@dataclass(frozen=True)
class Frame:
    msg_type: MsgType
    seq: int
    src: int
    dst: int
    payload: bytes = b""

    def __post_init__(self) -> None:
        if len(self.payload) > MAX_PAYLOAD:
            raise PayloadTooLong(f"payload {len(self.payload)} bytes exceeds {MAX_PAYLOAD}")
        if not 0 <= self.seq <= 0xFFFF:
            raise ValueError("seq must fit in 16 bits")
        for name, node in (("src", self.src), ("dst", self.dst)):
            if not 0 <= node <= 0xFF:
                raise ValueError(f"{name} must fit in one byte")

    @property
    def wire_size(self) -> int:
        return FRAME_OVERHEAD + len(self.payload)


def encode_frame(frame: Frame) -> bytes:
    body = struct.pack(
        "<BHBBH",
        frame.msg_type.value,
        frame.seq,
        frame.src,
        frame.dst,
        len(frame.payload),
    ) + frame.payload
    return bytes([SOF]) + body + struct.pack("<H", crc16(body))


def decode_frame(data: bytes) -> Frame:
    """Parse one exact frame; every corruption maps to a distinct error class."""
    if len(data) < 1:
        raise Truncated("empty buffer")
    if data[0] != SOF:
        raise BadSof(f"expected 0x{SOF:02X}, got 0x{data[0]:02X}")
    if len(data) < HEADER_LEN:
        raise Truncated(f"header needs {HEADER_LEN} bytes, got {len(data)}")
    type_code, seq, src, dst, plen = struct.unpack("<BHBBH", data[1:HEADER_LEN])
    if len(data) != FRAME_OVERHEAD + plen:
        raise Truncated(
            f"declared payload {plen} implies {FRAME_OVERHEAD + plen} bytes, got {len(data)}"
        )
    if plen > MAX_PAYLOAD:
        raise Truncated(f"declared payload {plen} exceeds {MAX_PAYLOAD}")
    body = data[1 : HEADER_LEN + plen]
    (crc,) = struct.unpack("<H", data[HEADER_LEN + plen :])
    if crc16(body) != crc:
        raise BadCrc(f"crc mismatch on {len(data)}-byte frame")
    try:
        msg_type = MsgType(type_code)
    except ValueError:
        raise UnknownType(f"unknown message type 0x{type_code:02X}") from None
    return Frame(msg_type, seq, src, dst, data[HEADER_LEN : HEADER_LEN + plen])


@dataclass(frozen=True)
class LinkConfig:
    baud: int = 115200
    latency_ms: int = 5
    jitter_ms: int = 0
    loss_prob: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.baud <= 0:
            raise ValueError("baud must be positive")
        if self.latency_ms < 0 or self.jitter_ms < 0:
            raise ValueError("latency_ms and jitter_ms must be non-negative")
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ValueError("loss_prob must be within [0, 1]")

    @property
    def bytes_per_s(self) -> float:
        # 8-N-1 serial framing carries one byte per 10 bits
        return self.baud / 10.0


class Delivery(NamedTuple):
    t_ms: int
    recipient: int
    frame: Frame


class Hub:
    """Central router on a simulated clock.

    Frames are scheduled at send time (latency + seeded jitter + seeded
    loss) and released by step() in deliver_at order, tie-broken by send
    order. Release is metered by a token bucket holding at most one
    maximum-size frame, so throughput over any window stays within
    baud/10 bytes per second plus a single frame of slack. The bucket
    starts empty: a burst is paced from its first byte.

    Per (src, recipient) pair the scheduled delivery time is clamped to
    be non-decreasing, so jitter can delay but never reorder a pair's
    traffic, the way a serial link physically behaves.
    """

    def __init__(self, config: LinkConfig, nodes: Iterable[int] = ()):
        self.config = config
        self._rng = random.Random(config.seed)
        self._nodes: set[int] = set()
        self._heap: list[tuple[int, int, int, Frame]] = []
        self._send_idx = 0
        self._pair_floor: dict[tuple[int, int], int] = {}
        self._tokens = 0.0
        self._capacity = float(FRAME_OVERHEAD + MAX_PAYLOAD)
        self._refill_at: int | None = None
        self._last_step: int | None = None
        self.frames_sent = 0
        self.frames_dropped = 0
        self.frames_delivered = 0
        for n in nodes:
            self.register(n)

    def register(self, node_id: int) -> None:
        if not 0 <= node_id <= 0xFE:
            raise ValueError("node id must be in [0, 0xFE]")
        self._nodes.add(node_id)

    def _schedule(self, frame: Frame, recipient: int, now_ms: int) -> None:
        if self._rng.random() < self.config.loss_prob:
            self.frames_dropped += 1
            return
        jitter = self._rng.randint(0, self.config.jitter_ms) if self.config.jitter_ms else 0
        deliver_at = now_ms + self.config.latency_ms + jitter
        key = (frame.src, recipient)
        floor = self._pair_floor.get(key)
        if floor is not None and deliver_at < floor:
            deliver_at = floor
        self._pair_floor[key] = deliver_at
        heapq.heappush(self._heap, (deliver_at, self._send_idx, recipient, frame))
        self._send_idx += 1

    def send(self, frame: Frame, now_ms: int) -> None:
        if frame.src not in self._nodes:
            raise ValueError(f"source node {frame.src} not registered")
        if self._refill_at is None:
            self._refill_at = now_ms  # byte budget accrues from first traffic
        self.frames_sent += 1
        if frame.dst == BROADCAST:
            for node in sorted(self._nodes - {frame.src}):
                self._schedule(frame, node, now_ms)
        else:
            if frame.dst not in self._nodes:
                raise UnknownDestination(f"node {frame.dst} not registered")
            self._schedule(frame, frame.dst, now_ms)

    def step(self, now_ms: int) -> list[Delivery]:
        """Release every due frame the byte budget allows, in order."""
        if self._last_step is not None and now_ms < self._last_step:
            raise ClockRegression(f"clock went from {self._last_step} to {now_ms}")
        self._last_step = now_ms
        if self._refill_at is None:
            self._refill_at = now_ms
        elapsed_ms = now_ms - self._refill_at
        if elapsed_ms > 0:
            self._tokens = min(
                self._capacity,
                self._tokens + self.config.bytes_per_s * elapsed_ms / 1000.0,
            )
        self._refill_at = now_ms
        out: list[Delivery] = []
        while self._heap and self._heap[0][0] <= now_ms:
            size = self._heap[0][3].wire_size
            if size > self._tokens:
                break  # head of line waits for budget; nothing overtakes it
            deliver_at, idx, recipient, frame = heapq.heappop(self._heap)
            self._tokens -= size
            self.frames_delivered += 1
            out.append(Delivery(now_ms, recipient, frame))
        return out

    @property
    def in_flight(self) -> int:
        return len(self._heap)
