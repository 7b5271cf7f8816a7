"""Headless runs, instrument scoring, and the live operator service.

A run configuration is a JSON document selecting the game, link, and
pipeline parameters plus exactly one trace source: a CSV file, the
bundled demo recording, or a synthesis schedule. Headless runs write the
session log and report to disk; serve mode owns the same engine on a
single simulation thread and exposes it over HTTP:

    GET  /state    latest snapshot
    POST /control  queue a control action (applied at the next tick)
    GET  /stream   newline-delimited JSON telemetry

The simulation loop is the only thread that touches the engine. The API
exchanges immutable messages with it through two queues: control actions
in (applied in arrival order, never dropped) and telemetry snapshots out
(bounded per subscriber, oldest dropped first). Pacing is cosmetic:
real-time mode only sleeps between ticks and never changes results.
"""
from __future__ import annotations

import json
import queue
import socketserver
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from pathlib import Path

from .netlink import LinkConfig
from .scales import (
    OutOfRange,
    ParseError,
    ScaleError,
    aggregate_likert,
    mas_score,
    moca_score,
    read_mas_csv,
    read_moca_csv,
    read_sam_csv,
    read_srms_csv,
    read_ueq_csv,
    read_whoqol_csv,
    round_half_up,
    sam_delta,
    srms_likert_table,
    srms_score,
    ueq_likert_table,
    ueq_score,
    whoqol_score,
)
from .session import (
    ControlAction,
    CtlKind,
    GameConfig,
    ReplayError,
    SessionEngine,
    SessionParams,
    SessionResult,
    _game_from_dict,
    _params_from_dict,
    replay_session,
    run_session,
)
from .sessionlog import LogError, SessionLog
from .signals import EmgTrace, IntentMode, SignalError, read_trace_csv, synth_emg

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DATA = 4
EXIT_MISMATCH = 5

DEMO_TRACE = "demo"
TELEMETRY_INTERVAL_MS = 50
STREAM_QUEUE_SIZE = 256


class ServiceError(Exception):
    """Base for operational failures; carries the process exit code."""

    exit_code = EXIT_CONFIG


class ConfigError(ServiceError):
    exit_code = EXIT_CONFIG


class UnknownInstrument(ConfigError):
    pass


class InputError(ServiceError):
    exit_code = EXIT_IO


class DataError(ServiceError):
    exit_code = EXIT_DATA


class ReplayMismatch(ServiceError):
    exit_code = EXIT_MISMATCH


class StageConflict(ServiceError):
    """A control that contradicts the current session state."""


# -- run configuration --------------------------------------------------------

PACING_FAST = "fast"
PACING_REALTIME = "realtime"


@dataclass(frozen=True)
class RunConfig:
    game: GameConfig
    link: LinkConfig
    params: SessionParams
    trace_file: str | None
    synth: dict | None
    seed: int
    auto_start: bool
    pacing: str
    out_log: str
    out_report: str
    controls: tuple[tuple[int, ControlAction], ...]

    def __post_init__(self) -> None:
        if (self.trace_file is None) == (self.synth is None):
            raise ConfigError("exactly one trace source required: file or synth")
        if self.pacing not in (PACING_FAST, PACING_REALTIME):
            raise ConfigError(f"pacing must be {PACING_FAST} or {PACING_REALTIME}")


_ACTION_NAMES = {
    "StartStage": CtlKind.START_STAGE,
    "StopStage": CtlKind.STOP_STAGE,
    "SetMode": CtlKind.SET_MODE,
    "Recalibrate": CtlKind.RECALIBRATE,
    "ScentTrigger": CtlKind.SCENT_TRIGGER,
    "SetEnabled": CtlKind.SET_ENABLED,
}
_NAME_BY_KIND = {v: k for k, v in _ACTION_NAMES.items()}


def parse_control_action(doc: object) -> ControlAction:
    """Validate a control document; raises DataError naming the defect."""
    if not isinstance(doc, dict):
        raise DataError("control must be a JSON object")
    name = doc.get("action")
    kind = _ACTION_NAMES.get(name)
    if kind is None:
        raise DataError(f"unknown action: {name!r}")
    if kind is CtlKind.SET_MODE:
        mode = doc.get("mode")
        if mode not in (IntentMode.EXTENSION.value, IntentMode.FLEXION.value):
            raise DataError(f"mode must be extension or flexion, got {mode!r}")
        return ControlAction(kind=kind, mode=IntentMode(mode))
    if kind is CtlKind.RECALIBRATE:
        try:
            k_on = float(doc["k_on"])
            k_off = float(doc["k_off"])
        except (KeyError, TypeError, ValueError):
            raise DataError("Recalibrate requires numeric k_on and k_off") from None
        if not k_on > k_off > 0:
            raise DataError(f"need k_on > k_off > 0, got k_on={k_on}, k_off={k_off}")
        return ControlAction(kind=kind, k_on=k_on, k_off=k_off)
    if kind is CtlKind.SET_ENABLED:
        enabled = doc.get("enabled")
        if not isinstance(enabled, bool):
            raise DataError("SetEnabled requires boolean 'enabled'")
        return ControlAction(kind=kind, enabled=enabled)
    return ControlAction(kind=kind)


def control_to_dict(action: ControlAction) -> dict:
    doc: dict = {"action": _NAME_BY_KIND[action.kind]}
    if action.kind is CtlKind.SET_MODE and action.mode is not None:
        doc["mode"] = action.mode.value
    elif action.kind is CtlKind.RECALIBRATE:
        doc["k_on"] = action.k_on
        doc["k_off"] = action.k_off
    elif action.kind is CtlKind.SET_ENABLED:
        doc["enabled"] = action.enabled
    return doc


def parse_run_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    known = {
        "game", "link", "params", "trace", "seed", "auto_start",
        "pacing", "out_log", "out_report", "controls",
    }
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        game = _game_from_dict(doc["game"]) if "game" in doc else GameConfig()
        link = LinkConfig(**doc["link"]) if "link" in doc else LinkConfig()
        params = _params_from_dict(doc["params"]) if "params" in doc else SessionParams()
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad config section: {e}") from None
    trace = doc.get("trace", {"file": DEMO_TRACE})
    if not isinstance(trace, dict) or len(trace) != 1 or next(iter(trace)) not in ("file", "synth"):
        raise ConfigError("trace must be {\"file\": path} or {\"synth\": {...}}")
    trace_file = trace.get("file")
    synth = trace.get("synth")
    controls = []
    for i, item in enumerate(doc.get("controls", [])):
        if not isinstance(item, dict) or "t_ms" not in item:
            raise ConfigError(f"controls[{i}] needs t_ms and an action")
        try:
            t_ms = int(item["t_ms"])
            action = parse_control_action({k: v for k, v in item.items() if k != "t_ms"})
        except (DataError, TypeError, ValueError) as e:
            raise ConfigError(f"controls[{i}]: {e}") from None
        controls.append((t_ms, action))
    try:
        return RunConfig(
            game=game,
            link=link,
            params=params,
            trace_file=trace_file,
            synth=synth,
            seed=int(doc.get("seed", 0)),
            auto_start=bool(doc.get("auto_start", True)),
            pacing=str(doc.get("pacing", PACING_FAST)),
            out_log=str(doc.get("out_log", "session_log.csv")),
            out_report=str(doc.get("out_report", "report.json")),
            controls=tuple(controls),
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad config value: {e}") from None


def load_run_config(
    path: str | Path | None,
    seed: int | None = None,
    trace: str | None = None,
) -> RunConfig:
    """Read a config file and apply CLI overrides; None path means defaults."""
    doc: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise InputError(f"cannot read config {path}: {e}") from None
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path} is not valid JSON: {e}") from None
    if seed is not None:
        doc["seed"] = seed
    if trace is not None:
        doc["trace"] = {"file": trace}
    return parse_run_config(doc)


def load_trace(cfg: RunConfig) -> EmgTrace:
    if cfg.synth is not None:
        spec = dict(cfg.synth)
        try:
            gestures = [(int(t), int(d)) for t, d in spec.pop("gestures")]
            return synth_emg(gestures, **spec)
        except (SignalError, TypeError, ValueError) as e:
            raise ConfigError(f"bad synth schedule: {e}") from None
    assert cfg.trace_file is not None
    try:
        if cfg.trace_file == DEMO_TRACE:
            ref = resources.files("rehabsim").joinpath("data/demo_trace.csv")
            with resources.as_file(ref) as path:
                return read_trace_csv(path)
        return read_trace_csv(cfg.trace_file)
    except OSError as e:
        raise InputError(f"cannot read trace {cfg.trace_file}: {e}") from None
    except (SignalError, ValueError) as e:
        raise DataError(f"bad trace {cfg.trace_file}: {e}") from None


# -- headless runs ------------------------------------------------------------

def run_headless(cfg: RunConfig, out_dir: str | Path = ".") -> tuple[SessionResult, Path, Path]:
    """Run to completion and persist the log and report."""
    trace = load_trace(cfg)
    result = run_session(
        trace,
        game=cfg.game,
        link=cfg.link,
        params=cfg.params,
        seed=cfg.seed,
        auto_start=cfg.auto_start,
        scheduled=list(cfg.controls) or None,
    )
    out = Path(out_dir)
    log_path = out / cfg.out_log
    report_path = out / cfg.out_report
    try:
        out.mkdir(parents=True, exist_ok=True)
        log_path.write_text(result.log.to_csv(), encoding="utf-8")
        report_path.write_text(result.report.to_json() + "\n", encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot write outputs under {out}: {e}") from None
    return result, log_path, report_path


def replay_file(log_path: str | Path) -> tuple[SessionResult, bool]:
    """Replay a recorded log; returns (result, verified).

    verified is True when the input was a finalized log and the replay
    reproduced it byte for byte; a finalized log that fails to reproduce
    raises ReplayMismatch.
    """
    try:
        text = Path(log_path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read log {log_path}: {e}") from None
    try:
        log = SessionLog.from_csv(text)
    except LogError as e:
        raise DataError(f"bad log {log_path}: {e}") from None
    try:
        result = replay_session(log)
    except (ReplayError, LogError, SignalError, ValueError) as e:
        raise DataError(f"cannot replay {log_path}: {e}") from None
    finalized = len(log.records) > 0 and log.records[-1].kind.value == "Net"
    if not finalized:
        return result, False
    if result.log.to_csv() != text:
        raise ReplayMismatch(
            f"replay of {log_path} diverged from the recorded log"
        )
    return result, True


# -- instrument scoring -------------------------------------------------------

INSTRUMENTS = ("mas", "moca", "srms", "ueq", "sam", "whoqol")

_AGREE_SRMS = ("somewhat_agree", "completely_agree")


def _split_key(key: str) -> tuple[str, str]:
    subject, _, session = key.partition("/")
    return subject, session


def _likert_block(summary) -> dict:
    return summary.to_dict()


def score_files(instrument: str, text: str) -> dict:
    """Score one instrument's response CSV into a report document."""
    try:
        if instrument == "mas":
            rows = read_mas_csv(text)
            return {
                "instrument": "mas",
                "n": len(rows),
                "scores": [{"subject": s, **mas_score(r).to_dict()} for s, r in rows],
            }
        if instrument == "moca":
            rows = read_moca_csv(text)
            return {
                "instrument": "moca",
                "n": len(rows),
                "scores": [{"subject": s, **moca_score(r).to_dict()} for s, r in rows],
            }
        if instrument == "srms":
            rows = read_srms_csv(text)
            summary = aggregate_likert(srms_likert_table([r for _, r in rows]))
            unions = {
                row.label: {
                    "exact_pct": summary.union_pct(row.label, _AGREE_SRMS),
                    "display_pct": round_half_up(summary.union_pct(row.label, _AGREE_SRMS)),
                }
                for row in summary.rows
            }
            return {
                "instrument": "srms",
                "n": len(rows),
                "scores": [
                    {
                        "subject": _split_key(k)[0],
                        "session": _split_key(k)[1],
                        "score": srms_score(r),
                    }
                    for k, r in rows
                ],
                "aggregate": _likert_block(summary),
                "agree_union_pct": unions,
            }
        if instrument == "ueq":
            rows = read_ueq_csv(text)
            summary = aggregate_likert(ueq_likert_table([r for _, r in rows]))
            sessions = sorted({_split_key(k)[1] for k, _ in rows})
            by_session = {}
            for sess in sessions:
                group = [r for k, r in rows if _split_key(k)[1] == sess]
                by_session[sess] = _likert_block(aggregate_likert(ueq_likert_table(group)))
            scores = [ueq_score(r) for _, r in rows]
            above = sum(1 for s in scores if s > 40)
            return {
                "instrument": "ueq",
                "n": len(rows),
                "scores": [
                    {
                        "subject": _split_key(k)[0],
                        "session": _split_key(k)[1],
                        "score": score,
                    }
                    for (k, _), score in zip(rows, scores)
                ],
                "above_40": {
                    "count": above,
                    "exact_pct": above * 100.0 / len(scores),
                    "display_pct": round_half_up(above * 100.0 / len(scores)),
                },
                "aggregate": _likert_block(summary),
                "by_session": by_session,
            }
        if instrument == "sam":
            rows = read_sam_csv(text)
            pre: dict[str, object] = {}
            post: dict[str, object] = {}
            order: list[str] = []
            for key, phase, resp in rows:
                slot = pre if phase == "pre" else post
                if key in slot:
                    raise DataError(f"duplicate {phase} rating for {key}")
                slot[key] = resp
                if key not in order:
                    order.append(key)
            missing = [k for k in order if k not in pre or k not in post]
            if missing:
                raise DataError(f"incomplete pre/post pairs: {', '.join(missing)}")
            deltas = []
            for key in order:
                d = sam_delta(pre[key], post[key])
                subject, session = _split_key(key)
                deltas.append({"subject": subject, "session": session, **d.to_dict()})
            return {"instrument": "sam", "n_pairs": len(deltas), "deltas": deltas}
        if instrument == "whoqol":
            rows = read_whoqol_csv(text)
            return {
                "instrument": "whoqol",
                "n": len(rows),
                "scores": [{"subject": s, **whoqol_score(r).to_dict()} for s, r in rows],
            }
    except (ParseError, OutOfRange) as e:
        raise DataError(str(e)) from None
    except ScaleError as e:
        raise DataError(str(e)) from None
    raise UnknownInstrument(
        f"unknown instrument: {instrument!r} (choose from {', '.join(INSTRUMENTS)})"
    )


def _text_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def fmt(cells: list[str]) -> str:
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    rule = "  ".join("-" * w for w in widths)
    return "\n".join([fmt(headers), rule] + [fmt(r) for r in rows])


def render_report_table(report: dict) -> str:
    """Plain-text rendering of a score report."""
    kind = report["instrument"]
    if kind == "mas":
        rows = [[s["subject"], str(s["total"]), s["tonus"]] for s in report["scores"]]
        return _text_table(["subject", "total", "tonus"], rows)
    if kind == "moca":
        rows = [
            [s["subject"], str(s["adjusted"]), s["classification"]]
            for s in report["scores"]
        ]
        return _text_table(["subject", "adjusted", "class"], rows)
    if kind in ("srms", "ueq"):
        rows = [
            [s["subject"], s["session"], str(s["score"])] for s in report["scores"]
        ]
        parts = [_text_table(["subject", "session", "score"], rows)]
        agg = report["aggregate"]
        arow = [
            [r["label"]] + [str(p) for p in r["display_pct"]] for r in agg["rows"]
        ]
        parts.append("")
        parts.append(_text_table(["item %"] + list(agg["categories"]), arow))
        if kind == "srms":
            urow = [
                [label, f"{u['exact_pct']:.1f}", str(u["display_pct"])]
                for label, u in report["agree_union_pct"].items()
            ]
            parts.append("")
            parts.append(_text_table(["question", "agree %", "display"], urow))
        return "\n".join(parts)
    if kind == "sam":
        rows = [
            [d["subject"], d["session"], str(d["valence"]), str(d["arousal"]), str(d["dominance"])]
            for d in report["deltas"]
        ]
        return _text_table(["subject", "session", "d_valence", "d_arousal", "d_dominance"], rows)
    if kind == "whoqol":
        rows = [
            [
                s["subject"],
                f"{s['physical']:.1f}",
                f"{s['psychological']:.1f}",
                f"{s['social']:.1f}",
                f"{s['environment']:.1f}",
            ]
            for s in report["scores"]
        ]
        return _text_table(
            ["subject", "physical", "psychological", "social", "environment"], rows
        )
    raise UnknownInstrument(f"unknown instrument: {kind!r}")


# -- live service -------------------------------------------------------------

class Service:
    """Owns the engine on one simulation thread and brokers API traffic."""

    def __init__(self, cfg: RunConfig, out_dir: str | Path = ".") -> None:
        self.cfg = cfg
        self.out_dir = Path(out_dir)
        trace = load_trace(cfg)
        self.engine = SessionEngine(
            trace,
            game=cfg.game,
            link=cfg.link,
            params=cfg.params,
            seed=cfg.seed,
            auto_start=cfg.auto_start,
            scheduled=list(cfg.controls) or None,
        )
        self.engine.set_telemetry(self._on_snapshot, interval_ms=TELEMETRY_INTERVAL_MS)
        self._controls: queue.Queue[ControlAction] = queue.Queue()
        self._subscribers: list[queue.Queue] = []
        self._lock = threading.Lock()
        self._latest = self.engine.snapshot()
        self._stop = threading.Event()
        self.done = threading.Event()
        self.result: SessionResult | None = None
        self._thread = threading.Thread(target=self._loop, name="sim-loop", daemon=True)

    # -- sim thread ----------------------------------------------------------

    def _on_snapshot(self, snap: dict) -> None:
        with self._lock:
            self._latest = snap
            subs = list(self._subscribers)
        for q in subs:
            # Display backpressure: drop the oldest snapshot, keep the new.
            try:
                q.put_nowait(snap)
            except queue.Full:
                try:
                    q.get_nowait()
                except queue.Empty:
                    pass
                try:
                    q.put_nowait(snap)
                except queue.Full:
                    pass

    def _drain_controls(self) -> bool:
        got = False
        while True:
            try:
                action = self._controls.get_nowait()
            except queue.Empty:
                return got
            self.engine.submit(action)
            got = True

    def _loop(self) -> None:
        pace_wall = time.monotonic()
        pace_sim = self.engine.t
        try:
            while not self._stop.is_set():
                self._drain_controls()
                if self.engine.is_finished():
                    break
                if self.engine.awaiting_input():
                    # Frozen until an operator action arrives.
                    self._on_snapshot(self.engine.snapshot())
                    try:
                        action = self._controls.get(timeout=0.1)
                    except queue.Empty:
                        continue
                    self.engine.submit(action)
                    pace_wall = time.monotonic()
                    pace_sim = self.engine.t
                    continue
                self.engine.tick_once()
                if self.cfg.pacing == PACING_REALTIME and self.engine.t % 16 == 0:
                    target = pace_wall + (self.engine.t - pace_sim) / 1000.0
                    delay = target - time.monotonic()
                    if delay > 0:
                        time.sleep(delay)
        finally:
            self.result = self.engine.finalize()
            try:
                self.out_dir.mkdir(parents=True, exist_ok=True)
                (self.out_dir / self.cfg.out_log).write_text(
                    self.result.log.to_csv(), encoding="utf-8"
                )
                (self.out_dir / self.cfg.out_report).write_text(
                    self.result.report.to_json() + "\n", encoding="utf-8"
                )
            except OSError:
                pass
            self._on_snapshot(self.engine.snapshot())
            self.done.set()

    # -- API thread side ------------------------------------------------------

    def start(self) -> None:
        self._thread.start()

    def stop(self, timeout: float = 5.0) -> None:
        self._stop.set()
        if self._thread.is_alive():
            self._thread.join(timeout=timeout)

    def snapshot(self) -> dict:
        with self._lock:
            return self._latest

    def submit(self, doc: object) -> dict:
        action = parse_control_action(doc)
        if action.kind is CtlKind.START_STAGE and self.snapshot()["status"] == "Running":
            raise StageConflict("a stage is already running")
        if self.done.is_set():
            raise StageConflict("session already finished")
        self._controls.put(action)
        return {"accepted": True, "action": control_to_dict(action)}

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=STREAM_QUEUE_SIZE)
        with self._lock:
            self._subscribers.append(q)
            latest = self._latest
        q.put(latest)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)


class _Handler(BaseHTTPRequestHandler):
    service: Service
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt: str, *args) -> None:  # noqa: A003 - server stays quiet
        pass

    def _send_json(self, code: int, doc: dict) -> None:
        data = (json.dumps(doc) + "\n").encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self) -> None:
        if self.path == "/state":
            self._send_json(200, self.service.snapshot())
        elif self.path == "/stream":
            self._stream()
        else:
            self._send_json(404, {"error": f"unknown path {self.path}"})

    def do_POST(self) -> None:
        if self.path != "/control":
            self._send_json(404, {"error": f"unknown path {self.path}"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
        except ValueError:
            length = 0
        body = self.rfile.read(length) if length > 0 else b""
        try:
            doc = json.loads(body)
        except json.JSONDecodeError:
            self._send_json(400, {"error": "body is not valid JSON"})
            return
        try:
            ack = self.service.submit(doc)
        except StageConflict as e:
            self._send_json(409, {"error": str(e)})
        except DataError as e:
            self._send_json(400, {"error": str(e)})
        else:
            self._send_json(202, ack)

    def _stream(self) -> None:
        q = self.service.subscribe()
        self.close_connection = True
        try:
            self.send_response(200)
            self.send_header("Content-Type", "application/x-ndjson")
            self.send_header("Cache-Control", "no-store")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Connection", "close")
            self.end_headers()
            while True:
                try:
                    snap = q.get(timeout=1.0)
                except queue.Empty:
                    if self.service.done.is_set():
                        break
                    continue
                self.wfile.write((json.dumps(snap) + "\n").encode("utf-8"))
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError, TimeoutError):
            pass
        finally:
            self.service.unsubscribe(q)


class _Server(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True


def serve(
    cfg: RunConfig,
    host: str = "127.0.0.1",
    port: int = 8000,
    out_dir: str | Path = ".",
) -> tuple[Service, socketserver.BaseServer]:
    """Build the service and bind its HTTP server; caller runs serve_forever."""
    service = Service(cfg, out_dir=out_dir)
    handler = type("BoundHandler", (_Handler,), {"service": service})
    try:
        httpd = _Server((host, port), handler)
    except OSError as e:
        raise InputError(f"cannot listen on {host}:{port}: {e}") from None
    service.start()
    return service, httpd
