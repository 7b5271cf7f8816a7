"""Game-session engine: staged squeeze play, olfactory triggers, and the
end-to-end simulation loop tying signals, actuation and the hub link
together on a 1 ms clock.

A session is five stages of three minutes. Each completed muscle
contraction (an onset/offset pair) squeezes one lemon; enough squeezes
fill the cup, advance it to a bigger tier and complete the stage. Every
squeeze asks the olfactory diffuser for a scent burst, subject to its
cooldown. Everything is deterministic for a fixed trace, config and
seed, and the full run is reconstructible from the session log alone.
"""
from __future__ import annotations

import dataclasses
import json
import struct
from dataclasses import dataclass, replace
from enum import Enum

from .actuation import LinkageModel, ServoState, command, finger_openness, linkage_position, step
from .netlink import (
    NODE_CONSOLE,
    NODE_EMG,
    NODE_EXO,
    NODE_GAME,
    NODE_HUB,
    NODE_OLFACTORY,
    Frame,
    Hub,
    LinkConfig,
    MsgType,
)
from .sessionlog import LogRecord, RecordKind, SessionLog
from .signals import (
    CalibrationResult,
    DetectorConfig,
    EmgSample,
    EmgTrace,
    IntentDetector,
    IntentEvent,
    IntentKind,
    IntentMode,
    MovingAverage,
)


class SessionError(Exception):
    pass


class NonAlternating(SessionError):
    pass


class StageNotRunning(SessionError):
    pass


class ReplayError(SessionError):
    pass


@dataclass(frozen=True)
class GameConfig:
    n_stages: int = 5
    stage_duration_s: int = 180
    squeeze_targets: tuple[int, ...] = (5, 8, 11, 14, 17)
    hold_target_ms: int = 1000
    score_per_squeeze_max: float = 100.0
    tiers_per_stage: int = 1
    intermission_ms: int = 3000
    extension_weight: float = 0.0

    def __post_init__(self) -> None:
        if self.n_stages < 1:
            raise ValueError("n_stages must be at least 1")
        if self.stage_duration_s <= 0:
            raise ValueError("stage_duration_s must be positive")
        if len(self.squeeze_targets) != self.n_stages:
            raise ValueError("squeeze_targets must list one target per stage")
        if any(b <= a for a, b in zip(self.squeeze_targets, self.squeeze_targets[1:])):
            raise ValueError("squeeze_targets must be strictly increasing")
        if any(t < 1 for t in self.squeeze_targets):
            raise ValueError("squeeze_targets must be positive")
        if self.hold_target_ms <= 0:
            raise ValueError("hold_target_ms must be positive")
        if self.score_per_squeeze_max < 0 or self.extension_weight < 0:
            raise ValueError("score parameters must be non-negative")
        if self.tiers_per_stage < 1:
            raise ValueError("tiers_per_stage must be at least 1")
        if self.intermission_ms < 0:
            raise ValueError("intermission_ms must be non-negative")

    @property
    def stage_duration_ms(self) -> int:
        return self.stage_duration_s * 1000


@dataclass(frozen=True)
class SessionParams:
    """Pipeline settings outside the game rules proper."""

    filter_window: int = 50
    baseline_mean: float = 80.0
    baseline_std: float = 10.0
    theta_on: float = 250.0
    theta_off: float = 150.0
    min_hold_ms: int = 100
    mode: IntentMode = IntentMode.EXTENSION
    stroke_mm: float = 20.0
    drive_target_deg: float = 180.0
    rest_target_deg: float = 0.0
    emg_frame_interval_ms: int = 20
    scent_enabled: bool = True
    scent_cooldown_ms: int = 0
    scent_emit_ms: int = 2000

    def __post_init__(self) -> None:
        if self.filter_window < 1:
            raise ValueError("filter_window must be at least 1")
        if self.min_hold_ms < 0:
            raise ValueError("min_hold_ms must be non-negative")
        for name in ("drive_target_deg", "rest_target_deg"):
            v = getattr(self, name)
            if not 0.0 <= v <= 180.0:
                raise ValueError(f"{name} must be within [0, 180]")
        if self.emg_frame_interval_ms < 1:
            raise ValueError("emg_frame_interval_ms must be at least 1")
        if self.scent_cooldown_ms < 0 or self.scent_emit_ms < 0:
            raise ValueError("scent timings must be non-negative")

    def thresholds(self) -> CalibrationResult:
        return CalibrationResult(
            self.baseline_mean, self.baseline_std, self.theta_on, self.theta_off
        )


@dataclass(frozen=True)
class SqueezeEvent:
    t_ms: int
    contract_ms: int
    extend_ms: int = 0

    def __post_init__(self) -> None:
        if self.contract_ms <= 0:
            raise ValueError("contract_ms must be positive")
        if self.extend_ms < 0:
            raise ValueError("extend_ms must be non-negative")


class StageStatus(Enum):
    RUNNING = "Running"
    COMPLETE = "Complete"
    TIMED_OUT = "TimedOut"


class GameEventKind(Enum):
    LEMON_SQUEEZED = 1
    CUP_FILLED = 2
    STAGE_COMPLETE = 3
    STAGE_TIMED_OUT = 4
    STAGE_START = 5
    GAME_COMPLETE = 6
    EXTENSION_BONUS = 7


@dataclass(frozen=True)
class GameEvent:
    kind: GameEventKind
    t_ms: int
    stage_index: int
    value: float = 0.0
    note: str = ""


@dataclass(frozen=True)
class StageState:
    index: int
    elapsed_ms: int = 0
    squeezes_done: int = 0
    cup_level: float = 0.0
    cup_tier: int = 0
    score: float = 0.0
    status: StageStatus = StageStatus.RUNNING


@dataclass(frozen=True)
class OlfactoryState:
    enabled: bool = True
    cooldown_ms: int = 0
    emitting_until_ms: int = -1
    last_trigger_ms: int | None = None


@dataclass(frozen=True)
class ScentEvent:
    t_ms: int
    until_ms: int


def detect_squeeze(events: list[IntentEvent]) -> list[SqueezeEvent]:
    """Pair alternating onset/offset events into squeezes.

    contract_ms spans the pair; extend_ms runs to the next onset and is
    zero for the final squeeze. A trailing unmatched onset is discarded.
    Raises NonAlternating if the upstream alternation guarantee was
    violated.
    """
    expected = IntentKind.ONSET
    last_t = None
    for ev in events:
        if ev.kind is not expected:
            raise NonAlternating(f"expected {expected.value} at t={ev.t_ms}")
        if last_t is not None and ev.t_ms <= last_t:
            raise NonAlternating(f"timestamps must increase, got {ev.t_ms} after {last_t}")
        last_t = ev.t_ms
        expected = IntentKind.OFFSET if expected is IntentKind.ONSET else IntentKind.ONSET
    out: list[SqueezeEvent] = []
    for i in range(0, len(events) - 1, 2):
        onset, offset = events[i], events[i + 1]
        extend = events[i + 2].t_ms - offset.t_ms if i + 2 < len(events) else 0
        out.append(SqueezeEvent(offset.t_ms, offset.t_ms - onset.t_ms, extend))
    return out


def score_squeeze(e: SqueezeEvent, cfg: GameConfig) -> float:
    """Points for one squeeze: linear in contraction up to the hold
    target, plus the (default zero) extension term, capped at max."""
    h = cfg.hold_target_ms
    pts = cfg.score_per_squeeze_max * min(e.contract_ms, h) / h
    if cfg.extension_weight > 0:
        pts += cfg.extension_weight * cfg.score_per_squeeze_max * min(e.extend_ms, h) / h
    return min(cfg.score_per_squeeze_max, pts)


def apply_squeeze(
    stage: StageState, e: SqueezeEvent, cfg: GameConfig
) -> tuple[StageState, list[GameEvent]]:
    if stage.status is not StageStatus.RUNNING:
        raise StageNotRunning(f"stage {stage.index} is {stage.status.value}")
    target = cfg.squeeze_targets[stage.index - 1]
    done = stage.squeezes_done + 1
    score = stage.score + score_squeeze(e, cfg)
    tier = stage.cup_tier
    status = stage.status
    events = [GameEvent(GameEventKind.LEMON_SQUEEZED, e.t_ms, stage.index, e.contract_ms)]
    fill = done - tier * target
    if fill >= target:
        tier += 1
        events.append(GameEvent(GameEventKind.CUP_FILLED, e.t_ms, stage.index, tier))
        if tier >= cfg.tiers_per_stage:
            status = StageStatus.COMPLETE
            level = 1.0
            events.append(
                GameEvent(GameEventKind.STAGE_COMPLETE, e.t_ms, stage.index, score, "chime")
            )
        else:
            level = 0.0
    else:
        level = fill / target
    new = replace(
        stage,
        squeezes_done=done,
        score=score,
        cup_level=level,
        cup_tier=tier,
        status=status,
    )
    return new, events


def tick_stage(stage: StageState, dt_ms: int, cfg: GameConfig) -> StageState:
    """Advance the stage clock; not-running stages are fixed points."""
    if dt_ms <= 0:
        raise ValueError("dt_ms must be positive")
    if stage.status is not StageStatus.RUNNING:
        return stage
    elapsed = stage.elapsed_ms + dt_ms
    if elapsed >= cfg.stage_duration_ms:
        return replace(stage, elapsed_ms=cfg.stage_duration_ms, status=StageStatus.TIMED_OUT)
    return replace(stage, elapsed_ms=elapsed)


def trigger_scent(
    o: OlfactoryState, t_ms: int, emit_ms: int
) -> tuple[OlfactoryState, list[ScentEvent]]:
    """Ask the diffuser for a burst; cooldown suppression is a normal,
    eventless outcome."""
    if not o.enabled:
        return o, []
    if o.last_trigger_ms is not None and t_ms - o.last_trigger_ms < o.cooldown_ms:
        return o, []
    new = replace(o, emitting_until_ms=t_ms + emit_ms, last_trigger_ms=t_ms)
    return new, [ScentEvent(t_ms, t_ms + emit_ms)]


def is_emitting(o: OlfactoryState, t_ms: int) -> bool:
    return o.enabled and t_ms < o.emitting_until_ms


# ---------------------------------------------------------------------------
# Control actions and wire payloads


class CtlKind(Enum):
    CONFIG = 0
    START_STAGE = 1
    STOP_STAGE = 2
    SET_MODE = 3
    RECALIBRATE = 4
    SCENT_TRIGGER = 5
    SET_ENABLED = 6


@dataclass(frozen=True)
class ControlAction:
    kind: CtlKind
    mode: IntentMode | None = None
    k_on: float = 0.0
    k_off: float = 0.0
    enabled: bool = True


_MODE_CODE = {IntentMode.EXTENSION: 1, IntentMode.FLEXION: 2}
_CODE_MODE = {v: k for k, v in _MODE_CODE.items()}
_KIND_CODE = {IntentKind.ONSET: 1, IntentKind.OFFSET: 2}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}


def pack_emg(t_ms: int, filtered: float) -> bytes:
    return struct.pack("<If", t_ms, filtered)


def pack_intent(ev: IntentEvent) -> bytes:
    return struct.pack("<IBB", ev.t_ms, _KIND_CODE[ev.kind], _MODE_CODE[ev.mode])


def unpack_intent(payload: bytes) -> IntentEvent:
    t_ms, kind, mode = struct.unpack("<IBB", payload)
    return IntentEvent(_CODE_KIND[kind], t_ms, _CODE_MODE[mode])


def pack_servo_cmd(t_ms: int, target_deg: float) -> bytes:
    return struct.pack("<If", t_ms, target_deg)


def unpack_servo_cmd(payload: bytes) -> float:
    return struct.unpack("<If", payload)[1]


def pack_scent_cmd(t_ms: int, action: int) -> bytes:
    return struct.pack("<IB", t_ms, action)


def unpack_scent_cmd(payload: bytes) -> int:
    return struct.unpack("<IB", payload)[1]


def pack_mode_set(t_ms: int, action: int, mode: IntentMode, k_on: float, k_off: float) -> bytes:
    return struct.pack("<IBBff", t_ms, action, _MODE_CODE[mode], k_on, k_off)


def unpack_mode_set(payload: bytes) -> tuple[int, IntentMode, float, float]:
    _, action, mode, k_on, k_off = struct.unpack("<IBBff", payload)
    return action, _CODE_MODE[mode], k_on, k_off


def pack_stage_ctl(t_ms: int, action: int) -> bytes:
    return struct.pack("<IB", t_ms, action)


def unpack_stage_ctl(payload: bytes) -> int:
    return struct.unpack("<IB", payload)[1]


# ---------------------------------------------------------------------------
# Config serialization (embedded in the log's first Ctl record)


def _game_to_dict(g: GameConfig) -> dict:
    d = dataclasses.asdict(g)
    d["squeeze_targets"] = list(g.squeeze_targets)
    return d


def _game_from_dict(d: dict) -> GameConfig:
    d = dict(d)
    d["squeeze_targets"] = tuple(d["squeeze_targets"])
    return GameConfig(**d)


def _params_to_dict(p: SessionParams) -> dict:
    d = dataclasses.asdict(p)
    d["mode"] = p.mode.value
    return d


def _params_from_dict(d: dict) -> SessionParams:
    d = dict(d)
    d["mode"] = IntentMode(d["mode"])
    return SessionParams(**d)


def config_json(
    game: GameConfig, link: LinkConfig, params: SessionParams, auto_start: bool, sample_rate_hz: int
) -> str:
    doc = {
        "game": _game_to_dict(game),
        "link": dataclasses.asdict(link),
        "params": _params_to_dict(params),
        "auto_start": auto_start,
        "sample_rate_hz": sample_rate_hz,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def config_from_json(text: str) -> tuple[GameConfig, LinkConfig, SessionParams, bool, int]:
    doc = json.loads(text)
    return (
        _game_from_dict(doc["game"]),
        LinkConfig(**doc["link"]),
        _params_from_dict(doc["params"]),
        bool(doc["auto_start"]),
        int(doc["sample_rate_hz"]),
    )


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class StageSummary:
    index: int
    status: str
    target: int
    squeezes: int
    score: float
    cup_level: float
    cup_tier: int
    elapsed_ms: int

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class SessionReport:
    total_score: float
    squeezes: int
    stages: tuple[StageSummary, ...]
    scent_emissions: int
    frames_sent: int
    frames_dropped: int

    def to_dict(self) -> dict:
        return {
            "total_score": self.total_score,
            "squeezes": self.squeezes,
            "stages": [s.to_dict() for s in self.stages],
            "scent_emissions": self.scent_emissions,
            "frames_sent": self.frames_sent,
            "frames_dropped": self.frames_dropped,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class SessionResult:
    report: SessionReport
    log: SessionLog


class SessionStatus(Enum):
    IDLE = "Idle"
    RUNNING = "Running"
    INTERMISSION = "Intermission"
    FINISHED = "Finished"


# ---------------------------------------------------------------------------
# The engine


class SessionEngine:
    """Single-owner simulation loop on a 1 ms clock.

    Per tick, strictly in order: stage start, control sends, the EMG
    sample (filter, intent, servo command, link telemetry), hub
    deliveries, servo motion, stage clock, telemetry callback. The order
    is part of the determinism contract; replay depends on it.
    """

    def __init__(
        self,
        trace: EmgTrace,
        game: GameConfig | None = None,
        link: LinkConfig | None = None,
        params: SessionParams | None = None,
        seed: int | None = None,
        auto_start: bool = True,
        scheduled: list[tuple[int, ControlAction]] | None = None,
    ):
        self.game = game or GameConfig()
        link = link or LinkConfig()
        if seed is not None:
            link = replace(link, seed=seed)
        self.link = link
        self.params = params or SessionParams()
        self.auto_start = auto_start
        self._samples = list(trace.samples)
        self._sample_rate = trace.sample_rate_hz
        self._sample_idx = 0

        self.hub = Hub(link, nodes=[NODE_HUB, NODE_EMG, NODE_EXO, NODE_GAME, NODE_OLFACTORY, NODE_CONSOLE])
        self._seq: dict[int, int] = {}
        self.filter = MovingAverage(self.params.filter_window)
        self.detector = IntentDetector(
            DetectorConfig(self.params.thresholds(), self.params.mode, self.params.min_hold_ms)
        )
        self.mode = self.params.mode
        self.servo = ServoState()
        self.linkage = LinkageModel(self.params.stroke_mm)
        self.olfactory = OlfactoryState(
            enabled=self.params.scent_enabled, cooldown_ms=self.params.scent_cooldown_ms
        )
        self.log = SessionLog()
        self.t = 0
        self.stage: StageState | None = None
        self._next_stage_index = 1
        self._stage_start_at: int | None = 0 if auto_start else None
        self._finished_stages: list[StageState] = []
        self.game_over = False
        self.scent_emissions = 0
        self.last_filtered = float(self.params.baseline_mean)
        self._pending_onset: int | None = None
        self._pending_ext: tuple[int, float] | None = None  # (offset t, applied score)
        self._queued: list[ControlAction] = []
        self._scheduled = sorted(scheduled or [], key=lambda x: x[0])
        self._sched_idx = 0
        self._telemetry_cb = None
        self._telemetry_ms = self.params.emg_frame_interval_ms
        self._finalized = False
        self.log.append(
            LogRecord(
                0,
                RecordKind.CTL,
                CtlKind.CONFIG.value,
                0,
                0,
                config_json(self.game, self.link, self.params, auto_start, self._sample_rate),
            )
        )

    # -- public controls ---------------------------------------------------

    def submit(self, action: ControlAction) -> None:
        """Queue an operator action; it enters the link on the next tick."""
        self._queued.append(action)

    def set_telemetry(self, callback, interval_ms: int | None = None) -> None:
        self._telemetry_cb = callback
        if interval_ms:
            self._telemetry_ms = interval_ms

    # -- helpers -----------------------------------------------------------

    def _next_seq(self, src: int) -> int:
        seq = self._seq.get(src, 0)
        self._seq[src] = (seq + 1) & 0xFFFF
        return seq

    def _send(self, msg_type: MsgType, src: int, dst: int, payload: bytes) -> None:
        self.hub.send(Frame(msg_type, self._next_seq(src), src, dst, payload), self.t)

    def _log(self, kind: RecordKind, k1=0, k2=0, k3=0, note="") -> None:
        self.log.append(LogRecord(self.t, kind, k1, k2, k3, note))

    def _log_game_event(self, ev: GameEvent) -> None:
        self._log(RecordKind.GAME, ev.kind.value, ev.stage_index, ev.value, ev.note)

    @property
    def status(self) -> SessionStatus:
        if self.game_over:
            return SessionStatus.FINISHED
        if self.stage is not None and self.stage.status is StageStatus.RUNNING:
            return SessionStatus.RUNNING
        if self._stage_start_at is not None:
            return SessionStatus.INTERMISSION if self._finished_stages else SessionStatus.IDLE
        return SessionStatus.IDLE

    # -- control actions ---------------------------------------------------

    def _send_control(self, action: ControlAction) -> None:
        t = self.t
        k = action.kind
        if k is CtlKind.START_STAGE:
            self._send(MsgType.STAGE_CTL, NODE_CONSOLE, NODE_GAME, pack_stage_ctl(t, 1))
            self._log(RecordKind.CTL, k.value)
        elif k is CtlKind.STOP_STAGE:
            self._send(MsgType.STAGE_CTL, NODE_CONSOLE, NODE_GAME, pack_stage_ctl(t, 2))
            self._log(RecordKind.CTL, k.value)
        elif k is CtlKind.SET_MODE:
            mode = action.mode or IntentMode.EXTENSION
            self._send(
                MsgType.MODE_SET, NODE_CONSOLE, NODE_EMG, pack_mode_set(t, 1, mode, 0.0, 0.0)
            )
            self._log(RecordKind.CTL, k.value, _MODE_CODE[mode])
        elif k is CtlKind.RECALIBRATE:
            self._send(
                MsgType.MODE_SET,
                NODE_CONSOLE,
                NODE_EMG,
                pack_mode_set(t, 2, self.mode, action.k_on, action.k_off),
            )
            self._log(RecordKind.CTL, k.value, action.k_on, action.k_off)
        elif k is CtlKind.SCENT_TRIGGER:
            self._send(MsgType.SCENT_CMD, NODE_CONSOLE, NODE_OLFACTORY, pack_scent_cmd(t, 1))
            self._log(RecordKind.CTL, k.value)
        elif k is CtlKind.SET_ENABLED:
            act = 2 if action.enabled else 3
            self._send(MsgType.SCENT_CMD, NODE_CONSOLE, NODE_OLFACTORY, pack_scent_cmd(t, act))
            self._log(RecordKind.CTL, k.value, 1 if action.enabled else 0)
        else:
            raise ValueError(f"cannot send {k}")

    @staticmethod
    def action_from_record(rec: LogRecord) -> ControlAction:
        kind = CtlKind(int(rec.k1))
        if kind is CtlKind.SET_MODE:
            return ControlAction(kind, mode=_CODE_MODE[int(rec.k2)])
        if kind is CtlKind.RECALIBRATE:
            return ControlAction(kind, k_on=float(rec.k2), k_off=float(rec.k3))
        if kind is CtlKind.SET_ENABLED:
            return ControlAction(kind, enabled=bool(int(rec.k2)))
        return ControlAction(kind)

    # -- delivery handlers ---------------------------------------------------

    def _handle_delivery(self, recipient: int, frame: Frame) -> None:
        mt = frame.msg_type
        if recipient == NODE_EXO and mt is MsgType.SERVO_CMD:
            self.servo = command(self.servo, unpack_servo_cmd(frame.payload))
        elif recipient == NODE_GAME and mt is MsgType.INTENT_EVENT:
            self._game_on_intent(unpack_intent(frame.payload))
        elif recipient == NODE_GAME and mt is MsgType.STAGE_CTL:
            self._game_on_stage_ctl(unpack_stage_ctl(frame.payload))
        elif recipient == NODE_EMG and mt is MsgType.MODE_SET:
            self._emg_on_mode_set(frame.payload)
        elif recipient == NODE_OLFACTORY and mt is MsgType.SCENT_CMD:
            self._olfactory_on_cmd(unpack_scent_cmd(frame.payload))
        # EmgFiltered at the game node is display-only; anything else is
        # tolerated silently (the link is best-effort by design)

    def _emg_on_mode_set(self, payload: bytes) -> None:
        action, mode, k_on, k_off = unpack_mode_set(payload)
        if action == 1:
            self.mode = mode
            self.detector.set_mode(mode)
        elif action == 2:
            p = self.params
            try:
                thresholds = CalibrationResult(
                    p.baseline_mean,
                    p.baseline_std,
                    p.baseline_mean + k_on * p.baseline_std,
                    p.baseline_mean + k_off * p.baseline_std,
                )
            except Exception:
                return  # invalid multipliers are rejected upstream; drop defensively
            self.detector.set_thresholds(thresholds)

    def _game_on_stage_ctl(self, action: int) -> None:
        if action == 1 and not self.game_over:
            if self.stage is None or self.stage.status is not StageStatus.RUNNING:
                self._start_stage()
        elif action == 2 and self.stage is not None and self.stage.status is StageStatus.RUNNING:
            stopped = replace(
                self.stage, elapsed_ms=min(self.stage.elapsed_ms, self.game.stage_duration_ms),
                status=StageStatus.TIMED_OUT,
            )
            self.stage = stopped
            self._log_game_event(
                GameEvent(GameEventKind.STAGE_TIMED_OUT, self.t, stopped.index,
                          stopped.squeezes_done, "stopped")
            )
            self._after_stage_end()

    def _game_on_intent(self, ev: IntentEvent) -> None:
        if ev.kind is IntentKind.ONSET:
            self._apply_extension_bonus(ev.t_ms)
            self._pending_onset = ev.t_ms
            return
        if self._pending_onset is None:
            return  # orphan offset (lost onset frame); drop
        onset_t = self._pending_onset
        self._pending_onset = None
        if ev.t_ms <= onset_t:
            return
        if self.stage is None or self.stage.status is not StageStatus.RUNNING:
            self._pending_ext = None
            return
        squeeze = SqueezeEvent(ev.t_ms, ev.t_ms - onset_t, 0)
        base_before = self.stage.score
        self.stage, events = apply_squeeze(self.stage, squeeze, self.game)
        applied = self.stage.score - base_before
        for g in events:
            self._log_game_event(g)
        if self.game.extension_weight > 0:
            self._pending_ext = (ev.t_ms, applied)
        self._send(MsgType.SCENT_CMD, NODE_GAME, NODE_OLFACTORY, pack_scent_cmd(self.t, 1))
        if self.stage.status is StageStatus.COMPLETE:
            self._after_stage_end()

    def _apply_extension_bonus(self, onset_t: int) -> None:
        if self._pending_ext is None or self.stage is None:
            return
        if self.stage.status is not StageStatus.RUNNING:
            self._pending_ext = None
            return
        off_t, applied = self._pending_ext
        self._pending_ext = None
        cfg = self.game
        extend = onset_t - off_t
        if extend <= 0:
            return
        bonus = cfg.extension_weight * cfg.score_per_squeeze_max * min(extend, cfg.hold_target_ms) / cfg.hold_target_ms
        bonus = min(bonus, cfg.score_per_squeeze_max - applied)
        if bonus <= 0:
            return
        self.stage = replace(self.stage, score=self.stage.score + bonus)
        self._log_game_event(
            GameEvent(GameEventKind.EXTENSION_BONUS, onset_t, self.stage.index, bonus)
        )

    def _olfactory_on_cmd(self, action: int) -> None:
        if action == 1:
            self.olfactory, events = trigger_scent(self.olfactory, self.t, self.params.scent_emit_ms)
            for ev in events:
                self.scent_emissions += 1
                self._log(RecordKind.SCENT, 1, ev.until_ms)
        elif action == 2:
            self.olfactory = replace(self.olfactory, enabled=True)
        elif action == 3:
            self.olfactory = replace(self.olfactory, enabled=False, emitting_until_ms=-1)

    # -- stage lifecycle -----------------------------------------------------

    def _start_stage(self) -> None:
        idx = self._next_stage_index
        self.stage = StageState(index=idx)
        self._next_stage_index += 1
        self._stage_start_at = None
        self._pending_onset = None
        self._pending_ext = None
        self._log_game_event(
            GameEvent(GameEventKind.STAGE_START, self.t, idx, self.game.squeeze_targets[idx - 1])
        )

    def _after_stage_end(self) -> None:
        assert self.stage is not None
        self._finished_stages.append(self.stage)
        self._pending_onset = None
        self._pending_ext = None
        if self._next_stage_index > self.game.n_stages:
            self.game_over = True
            total = sum(s.score for s in self._finished_stages)
            self._log_game_event(
                GameEvent(GameEventKind.GAME_COMPLETE, self.t, self.stage.index, total)
            )
            self.stage = None
        else:
            self._stage_start_at = self.t + self.game.intermission_ms
            self.stage = None

    # -- the tick ------------------------------------------------------------

    def tick_once(self) -> None:
        t = self.t
        if self._stage_start_at is not None and t >= self._stage_start_at and not self.game_over:
            self._start_stage()
        while self._sched_idx < len(self._scheduled) and self._scheduled[self._sched_idx][0] <= t:
            self._send_control(self._scheduled[self._sched_idx][1])
            self._sched_idx += 1
        if self._queued:
            for action in self._queued:
                self._send_control(action)
            self._queued.clear()
        if self._sample_idx < len(self._samples) and self._samples[self._sample_idx].t_ms == t:
            sample = self._samples[self._sample_idx]
            self._sample_idx += 1
            filtered = self.filter.update(sample.value)
            self.last_filtered = filtered
            self._log(RecordKind.EMG, sample.value, filtered)
            if t % self.params.emg_frame_interval_ms == 0:
                self._send(MsgType.EMG_FILTERED, NODE_EMG, NODE_GAME, pack_emg(t, filtered))
            event = self.detector.update(t, filtered)
            if event is not None:
                self._log(
                    RecordKind.INTENT, _KIND_CODE[event.kind], _MODE_CODE[event.mode], filtered
                )
                self._send(MsgType.INTENT_EVENT, NODE_EMG, NODE_GAME, pack_intent(event))
                target = (
                    self.params.drive_target_deg
                    if event.kind is IntentKind.ONSET
                    else self.params.rest_target_deg
                )
                self._send(MsgType.SERVO_CMD, NODE_EMG, NODE_EXO, pack_servo_cmd(t, target))
        for delivery in self.hub.step(t):
            self._handle_delivery(delivery.recipient, delivery.frame)
        before = self.servo.theta_deg
        self.servo = step(self.servo, 0.001)
        moved = self.servo.theta_deg != before
        settled = moved and self.servo.theta_deg == self.servo.target_deg
        if moved and (t % 20 == 0 or settled):
            x = linkage_position(self.servo.theta_deg, self.linkage)
            pose = finger_openness(x, self.linkage, self.mode)
            self._log(RecordKind.SERVO, self.servo.theta_deg, self.servo.target_deg, pose.openness)
        if self.stage is not None and self.stage.status is StageStatus.RUNNING:
            self.stage = tick_stage(self.stage, 1, self.game)
            if self.stage.status is StageStatus.TIMED_OUT:
                self._log_game_event(
                    GameEvent(
                        GameEventKind.STAGE_TIMED_OUT, t, self.stage.index, self.stage.squeezes_done
                    )
                )
                self._after_stage_end()
        if self._telemetry_cb is not None and t % self._telemetry_ms == 0:
            self._telemetry_cb(self.snapshot())
        self.t = t + 1

    # -- fast-forward --------------------------------------------------------

    def _quiescent(self) -> bool:
        return (
            self._sample_idx >= len(self._samples)
            and self.hub.in_flight == 0
            and self.servo.theta_deg == self.servo.target_deg
            and not self._queued
        )

    def _next_boundary(self) -> int | None:
        """Earliest future tick at which anything can happen while quiescent."""
        candidates = []
        if self.stage is not None and self.stage.status is StageStatus.RUNNING:
            candidates.append(self.t + (self.game.stage_duration_ms - self.stage.elapsed_ms) - 1)
        if self._stage_start_at is not None and not self.game_over:
            candidates.append(max(self._stage_start_at, self.t))
        if self._sched_idx < len(self._scheduled):
            candidates.append(max(self._scheduled[self._sched_idx][0], self.t))
        return min(candidates) if candidates else None

    def _fast_forward(self, stop_at: int | None = None) -> bool:
        """Jump the clock to the next boundary; identical to 1 ms ticking
        because in a quiescent span no component can log or change state."""
        if self._telemetry_cb is not None:
            return False  # a live subscriber needs every telemetry tick
        if not self._quiescent():
            return False
        target = self._next_boundary()
        if target is None:
            return False
        if stop_at is not None:
            target = min(target, stop_at)
        if target <= self.t:
            return False
        dt = target - self.t
        if self.stage is not None and self.stage.status is StageStatus.RUNNING:
            self.stage = replace(self.stage, elapsed_ms=self.stage.elapsed_ms + dt)
        self.t = target
        return True

    def awaiting_input(self) -> bool:
        """Nothing can ever happen again without an external control: trace
        and link drained, no stage running or scheduled, game not over."""
        return (
            not self.game_over
            and self._quiescent()
            and (self.stage is None or self.stage.status is not StageStatus.RUNNING)
            and self._stage_start_at is None
            and self._sched_idx >= len(self._scheduled)
        )

    # -- results ---------------------------------------------------------------

    def _all_stages(self) -> list[StageState]:
        out = list(self._finished_stages)
        if self.stage is not None:
            out.append(self.stage)
        return out

    def report(self) -> SessionReport:
        stages = tuple(
            StageSummary(
                index=s.index,
                status=s.status.value,
                target=self.game.squeeze_targets[s.index - 1],
                squeezes=s.squeezes_done,
                score=s.score,
                cup_level=s.cup_level,
                cup_tier=s.cup_tier,
                elapsed_ms=s.elapsed_ms,
            )
            for s in self._all_stages()
        )
        return SessionReport(
            total_score=sum(s.score for s in stages),
            squeezes=sum(s.squeezes for s in stages),
            stages=stages,
            scent_emissions=self.scent_emissions,
            frames_sent=self.hub.frames_sent,
            frames_dropped=self.hub.frames_dropped,
        )

    def finalize(self) -> SessionResult:
        if not self._finalized:
            self._finalized = True
            self._log(
                RecordKind.NET,
                self.hub.frames_sent,
                self.hub.frames_delivered,
                self.hub.frames_dropped,
            )
        return SessionResult(self.report(), self.log)

    def _drained(self) -> bool:
        return self.hub.in_flight == 0 and self.servo.theta_deg == self.servo.target_deg

    def is_finished(self) -> bool:
        """Game over with the link and servo drained and no pending controls."""
        return self.game_over and self._drained() and not self._queued

    def run(self, stop_at: int | None = None) -> SessionResult:
        """Tick to completion: game over with the link and servo drained,
        a dead end (nothing can ever happen again), or stop_at."""
        while True:
            if stop_at is not None and self.t >= stop_at:
                break
            if self.is_finished():
                break
            if self.awaiting_input():
                break
            if not self._fast_forward(stop_at):
                self.tick_once()
        return self.finalize()

    def snapshot(self) -> dict:
        stage = None
        if self.stage is not None:
            s = self.stage
            stage = {
                "index": s.index,
                "status": s.status.value,
                "target": self.game.squeeze_targets[s.index - 1],
                "squeezes": s.squeezes_done,
                "cup_level": s.cup_level,
                "cup_tier": s.cup_tier,
                "score": s.score,
                "elapsed_ms": s.elapsed_ms,
            }
        totals = self.report()
        return {
            "t_ms": self.t,
            "status": self.status.value,
            "mode": self.mode.value,
            "filtered_emg": self.last_filtered,
            "intent_active": self.detector.active,
            "servo_theta": self.servo.theta_deg,
            "servo_target": self.servo.target_deg,
            "openness": finger_openness(
                linkage_position(self.servo.theta_deg, self.linkage), self.linkage, self.mode
            ).openness,
            "stage": stage,
            "scent": {
                "enabled": self.olfactory.enabled,
                "emitting": is_emitting(self.olfactory, self.t),
                "last_trigger_ms": self.olfactory.last_trigger_ms,
            },
            "totals": {
                "squeezes": totals.squeezes,
                "score": totals.total_score,
                "scent_emissions": totals.scent_emissions,
                "frames_sent": totals.frames_sent,
                "frames_dropped": totals.frames_dropped,
            },
        }


def run_session(
    trace: EmgTrace,
    game: GameConfig | None = None,
    link: LinkConfig | None = None,
    params: SessionParams | None = None,
    seed: int | None = None,
    auto_start: bool = True,
    scheduled: list[tuple[int, ControlAction]] | None = None,
) -> SessionResult:
    """Run a full deterministic session and return its report and log."""
    engine = SessionEngine(trace, game, link, params, seed, auto_start, scheduled)
    return engine.run()


def replay_session(log: SessionLog) -> SessionResult:
    """Re-run a logged session from its own contents.

    The first record must be the embedded config; raw samples are taken
    from Emg records and operator actions from Ctl records (each re-sent
    at its recorded tick, reproducing the link's random draws). The
    rebuilt run regenerates the identical log and report.
    """
    records = list(log)
    if not records or records[0].kind is not RecordKind.CTL or int(records[0].k1) != 0:
        raise ReplayError("log must begin with an embedded config record")
    game, link, params, auto_start, rate = config_from_json(records[0].note)
    samples = []
    scheduled: list[tuple[int, ControlAction]] = []
    stop_at = None
    for rec in records[1:]:
        if rec.kind is RecordKind.EMG:
            samples.append(EmgSample(rec.t_ms, int(rec.k1)))
        elif rec.kind is RecordKind.CTL:
            if int(rec.k1) == 0:
                raise ReplayError(f"duplicate config record at t={rec.t_ms}")
            scheduled.append((rec.t_ms, SessionEngine.action_from_record(rec)))
        elif rec.kind is RecordKind.NET:
            stop_at = rec.t_ms
    trace = EmgTrace(tuple(samples), rate)
    engine = SessionEngine(trace, game, link, params, None, auto_start, scheduled)
    return engine.run(stop_at=stop_at)
