"""Append-only session log, the simulator's stand-in for the SD card.

Records are written in arrival order and never mutated; equal
timestamps keep append order so a 1 ms-resolution run replays
deterministically. The on-disk form is a small CSV dialect: header
`t_ms,kind,k1,k2,k3,note`, LF endings, numbers in plain decimal (ints
bare, floats via repr so they round-trip exactly).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator


class LogError(Exception):
    pass


class TimestampRegression(LogError):
    pass


class MalformedRecord(LogError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class RecordKind(Enum):
    EMG = "Emg"
    INTENT = "Intent"
    SERVO = "Servo"
    GAME = "Game"
    SCENT = "Scent"
    NET = "Net"
    CTL = "Ctl"


Number = int | float


@dataclass(frozen=True)
class LogRecord:
    t_ms: int
    kind: RecordKind
    k1: Number = 0
    k2: Number = 0
    k3: Number = 0
    note: str = ""

    def __post_init__(self) -> None:
        if self.t_ms < 0:
            raise ValueError("t_ms must be non-negative")
        if "\n" in self.note or "\r" in self.note:
            raise ValueError("note must be a single line")


def _fmt(x: Number) -> str:
    return str(x) if isinstance(x, int) else repr(x)


def _parse_num(s: str) -> Number:
    try:
        return int(s)
    except ValueError:
        return float(s)


def _escape(note: str) -> str:
    if "," in note or '"' in note:
        return '"' + note.replace('"', '""') + '"'
    return note


HEADER = "t_ms,kind,k1,k2,k3,note"


class SessionLog:
    """In-memory append-only record list with a bit-exact CSV form."""

    def __init__(self) -> None:
        self._records: list[LogRecord] = []

    def append(self, rec: LogRecord) -> None:
        if self._records and rec.t_ms < self._records[-1].t_ms:
            raise TimestampRegression(
                f"t_ms {rec.t_ms} precedes last record at {self._records[-1].t_ms}"
            )
        self._records.append(rec)

    @property
    def records(self) -> tuple[LogRecord, ...]:
        return tuple(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[LogRecord]:
        return iter(self._records)

    def to_csv(self) -> str:
        lines = [HEADER]
        for r in self._records:
            lines.append(
                f"{r.t_ms},{r.kind.value},{_fmt(r.k1)},{_fmt(r.k2)},{_fmt(r.k3)},{_escape(r.note)}"
            )
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "SessionLog":
        import csv as _csv
        import io

        log = cls()
        reader = _csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRecord(1, "missing header") from None
        if ",".join(header) != HEADER:
            raise MalformedRecord(1, f"bad header {','.join(header)!r}")
        for line_no, row in enumerate(reader, start=2):
            if row == []:
                continue
            if len(row) != 6:
                raise MalformedRecord(line_no, f"expected 6 fields, got {len(row)}")
            try:
                t_ms = int(row[0])
                kind = RecordKind(row[1])
                k1, k2, k3 = (_parse_num(v) for v in row[2:5])
                rec = LogRecord(t_ms, kind, k1, k2, k3, row[5])
            except (ValueError, KeyError) as exc:
                raise MalformedRecord(line_no, str(exc)) from None
            try:
                log.append(rec)
            except TimestampRegression as exc:
                raise MalformedRecord(line_no, str(exc)) from None
        return log

    @classmethod
    def read_csv(cls, path) -> "SessionLog":
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return cls.from_csv(fh.read())


def replay(log: SessionLog) -> Iterator[LogRecord]:
    """The reconstructed record stream, in original order.

    The session engine consumes this to rebuild its inputs (raw samples
    and control actions) and re-run a log end to end.
    """
    return iter(log)
