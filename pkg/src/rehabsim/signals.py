"""Muscle-signal pipeline: synthesis, moving-average filtering, calibration,
and hysteresis intent detection.

The pipeline mirrors the firmware path of an EMG-assisted hand device:
raw ADC samples (0..1023) are smoothed with a 50-sample moving average,
thresholds are calibrated from a rest recording, and a two-threshold
state machine turns the filtered stream into alternating onset/offset
intent events. Everything here is deterministic and side-effect free so
sessions can be replayed bit-for-bit.
"""
from __future__ import annotations

import csv
import random
import statistics
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

ADC_MIN = 0
ADC_MAX = 1023
DEFAULT_WINDOW = 50
DEFAULT_SAMPLE_RATE_HZ = 1000


class SignalError(Exception):
    """Base class for signal-pipeline errors."""


class EmptyTrace(SignalError):
    pass


class UndetectableIntent(SignalError):
    pass


class DegenerateCalibration(SignalError):
    pass


class OverlappingGestures(SignalError):
    pass


class IntentMode(Enum):
    EXTENSION = "extension"
    FLEXION = "flexion"


class IntentKind(Enum):
    ONSET = "onset"
    OFFSET = "offset"


@dataclass(frozen=True)
class EmgSample:
    t_ms: int
    value: int

    def __post_init__(self) -> None:
        if self.t_ms < 0:
            raise ValueError(f"t_ms must be non-negative, got {self.t_ms}")
        if not ADC_MIN <= self.value <= ADC_MAX:
            raise ValueError(f"value {self.value} outside ADC range [{ADC_MIN}, {ADC_MAX}]")


@dataclass(frozen=True)
class EmgTrace:
    samples: tuple[EmgSample, ...]
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE_HZ

    def __post_init__(self) -> None:
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        period = 1000.0 / self.sample_rate_hz
        prev = None
        for s in self.samples:
            if prev is not None:
                if s.t_ms <= prev:
                    raise ValueError("sample timestamps must be strictly increasing")
                # spacing must match the declared rate within one 1 ms tick
                if abs((s.t_ms - prev) - period) > 1.0:
                    raise ValueError(
                        f"sample spacing {s.t_ms - prev} ms inconsistent with {self.sample_rate_hz} Hz"
                    )
            prev = s.t_ms

    def __len__(self) -> int:
        return len(self.samples)

    def values(self) -> list[int]:
        return [s.value for s in self.samples]


@dataclass(frozen=True)
class CalibrationResult:
    baseline_mean: float
    baseline_std: float
    theta_on: float
    theta_off: float

    def __post_init__(self) -> None:
        if self.baseline_std < 0:
            raise ValueError("baseline_std must be non-negative")
        if not self.theta_on > self.theta_off > self.baseline_mean:
            raise DegenerateCalibration(
                f"need theta_on > theta_off > baseline_mean, got "
                f"{self.theta_on} / {self.theta_off} / {self.baseline_mean}"
            )


@dataclass(frozen=True)
class IntentEvent:
    kind: IntentKind
    t_ms: int
    mode: IntentMode


class MovingAverage:
    """Streaming mean over the last `window` inputs.

    Until the window fills, the mean is taken over however many samples
    have been seen (no undefined warm-up region). Integer inputs use an
    exact running integer sum; if any float sneaks in, the sum is
    recomputed from the buffer each step to avoid drift.
    """

    __slots__ = ("window", "_buf", "_sum", "_int_only")

    def __init__(self, window: int = DEFAULT_WINDOW):
        if window < 1:
            raise ValueError("window must be >= 1")
        self.window = window
        self._buf: deque = deque(maxlen=window)
        self._sum = 0
        self._int_only = True

    def update(self, x) -> float:
        if not ADC_MIN <= x <= ADC_MAX:
            raise ValueError(f"input {x} outside ADC range [{ADC_MIN}, {ADC_MAX}]")
        if self._int_only and not isinstance(x, int):
            self._int_only = False
        buf = self._buf
        if len(buf) == buf.maxlen:
            self._sum -= buf[0]
        buf.append(x)
        self._sum += x
        if not self._int_only:
            self._sum = sum(buf)
        return self._sum / len(buf)

    def reset(self) -> None:
        self._buf.clear()
        self._sum = 0
        self._int_only = True


def filter_trace(trace: EmgTrace, window: int = DEFAULT_WINDOW) -> list[float]:
    """Run the moving average over a whole trace, one output per sample."""
    f = MovingAverage(window)
    return [f.update(s.value) for s in trace.samples]


def calibrate(
    rest: EmgTrace,
    active: EmgTrace,
    k_on: float = 3.0,
    k_off: float = 1.5,
    window: int = DEFAULT_WINDOW,
) -> CalibrationResult:
    """Derive onset/offset thresholds from a rest and an active recording.

    Thresholds are baseline mean + k * std of the *filtered* rest trace.
    Raises UndetectableIntent if the filtered active trace never reaches
    theta_on (the thresholds would never fire), and DegenerateCalibration
    when the rest trace has too little variance to separate the two
    thresholds (e.g. a constant signal).
    """
    if len(rest) == 0 or len(active) == 0:
        raise EmptyTrace("calibration needs non-empty rest and active traces")
    if not k_on > k_off > 0:
        raise ValueError("require k_on > k_off > 0")
    rest_f = filter_trace(rest, window)
    mean = statistics.fmean(rest_f)
    std = statistics.pstdev(rest_f)
    theta_on = mean + k_on * std
    theta_off = mean + k_off * std
    if not theta_on > theta_off:
        raise DegenerateCalibration(
            f"rest trace variance too low (std={std}); theta_on must exceed theta_off"
        )
    active_max = max(filter_trace(active, window))
    if active_max < theta_on:
        raise UndetectableIntent(
            f"filtered active maximum {active_max:.2f} never reaches theta_on {theta_on:.2f}"
        )
    return CalibrationResult(mean, std, theta_on, theta_off)


@dataclass(frozen=True)
class DetectorConfig:
    thresholds: CalibrationResult
    mode: IntentMode = IntentMode.EXTENSION
    min_hold_ms: int = 100

    def __post_init__(self) -> None:
        if self.min_hold_ms < 0:
            raise ValueError("min_hold_ms must be non-negative")


class IntentDetector:
    """Two-threshold hysteresis detector over a filtered sample stream.

    Emits ONSET once the value has stayed at or above theta_on for
    min_hold_ms, then OFFSET once it has stayed at or below theta_off for
    min_hold_ms; events strictly alternate. Values inside the hysteresis
    band (theta_off, theta_on) reset any pending candidate.
    """

    def __init__(self, config: DetectorConfig):
        self.config = config
        self.active = False
        self._cand_t: int | None = None

    @property
    def mode(self) -> IntentMode:
        return self.config.mode

    def set_mode(self, mode: IntentMode) -> None:
        # mode labels future events; the crossing logic is unchanged
        self.config = DetectorConfig(self.config.thresholds, mode, self.config.min_hold_ms)

    def set_thresholds(self, thresholds: CalibrationResult) -> None:
        self.config = DetectorConfig(thresholds, self.config.mode, self.config.min_hold_ms)
        self._cand_t = None

    def update(self, t_ms: int, value: float) -> IntentEvent | None:
        th = self.config.thresholds
        hold = self.config.min_hold_ms
        if not self.active:
            if value >= th.theta_on:
                if self._cand_t is None:
                    self._cand_t = t_ms
                if t_ms - self._cand_t >= hold:
                    self.active = True
                    self._cand_t = None
                    return IntentEvent(IntentKind.ONSET, t_ms, self.config.mode)
            else:
                self._cand_t = None
        else:
            if value <= th.theta_off:
                if self._cand_t is None:
                    self._cand_t = t_ms
                if t_ms - self._cand_t >= hold:
                    self.active = False
                    self._cand_t = None
                    return IntentEvent(IntentKind.OFFSET, t_ms, self.config.mode)
            else:
                self._cand_t = None
        return None


def detect_intent(
    samples: Iterable[tuple[int, float]], config: DetectorConfig
) -> list[IntentEvent]:
    """Run the hysteresis detector over (t_ms, filtered value) pairs."""
    det = IntentDetector(config)
    events = []
    for t_ms, value in samples:
        ev = det.update(t_ms, value)
        if ev is not None:
            events.append(ev)
    return events


DEFAULT_BASELINE_ADC = 80
DEFAULT_BURST_ADC = 450


def synth_emg(
    gestures: Sequence[tuple[int, int]],
    noise_std: float = 8.0,
    seed: int = 0,
    *,
    baseline: int = DEFAULT_BASELINE_ADC,
    burst: int = DEFAULT_BURST_ADC,
    duration_ms: int | None = None,
    tail_ms: int = 500,
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE_HZ,
) -> EmgTrace:
    """Generate a synthetic raw trace with rectangular activation bursts.

    `gestures` is an ordered schedule of (start_ms, hold_ms) bursts; the
    trace runs until the last burst ends plus `tail_ms` (or `duration_ms`
    if given). Gaussian noise is added per sample and the result is
    clamped to the ADC range. Pure function of its arguments.
    """
    if noise_std < 0:
        raise ValueError("noise_std must be non-negative")
    prev_end = None
    for start, hold in gestures:
        if start < 0 or hold <= 0:
            raise OverlappingGestures(f"bad gesture (start={start}, hold={hold})")
        if prev_end is not None and start < prev_end:
            raise OverlappingGestures(
                f"gesture at {start} ms overlaps previous ending at {prev_end} ms"
            )
        prev_end = start + hold
    if duration_ms is None:
        duration_ms = (prev_end if prev_end is not None else 500) + tail_ms
    rng = random.Random(seed)
    period_ms = 1000.0 / sample_rate_hz
    n = int(duration_ms / period_ms)
    samples = []
    gi = 0
    for i in range(n):
        t = int(round(i * period_ms))
        while gi < len(gestures) and t >= gestures[gi][0] + gestures[gi][1]:
            gi += 1
        in_burst = gi < len(gestures) and gestures[gi][0] <= t < gestures[gi][0] + gestures[gi][1]
        level = burst if in_burst else baseline
        if noise_std > 0:
            level += rng.gauss(0.0, noise_std)
        v = min(ADC_MAX, max(ADC_MIN, int(round(level))))
        samples.append(EmgSample(t, v))
    return EmgTrace(tuple(samples), sample_rate_hz)


def write_trace_csv(trace: EmgTrace, path) -> None:
    """Persist a trace as `t_ms,value` CSV (UTF-8, LF endings)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_ms", "value"])
        for s in trace.samples:
            w.writerow([s.t_ms, s.value])


def read_trace_csv(path, sample_rate_hz: int = DEFAULT_SAMPLE_RATE_HZ) -> EmgTrace:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header is None or [h.strip() for h in header[:2]] != ["t_ms", "value"]:
            raise ValueError(f"{path}: expected header 't_ms,value'")
        samples = []
        for row in r:
            if not row:
                continue
            samples.append(EmgSample(int(row[0]), int(row[1])))
    return EmgTrace(tuple(samples), sample_rate_hz)
