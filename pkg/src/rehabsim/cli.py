"""Command-line entry points.

Subcommands:
    sim     run a session headless and write log + report
    replay  re-execute a recorded log and verify it reproduces
    score   score an instrument response CSV
    serve   run a live session behind the HTTP operator API

Exit codes: 0 success, 2 configuration or usage error, 3 file or
socket error, 4 malformed input data, 5 replay verification mismatch.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .service import (
    EXIT_OK,
    INSTRUMENTS,
    InputError,
    ServiceError,
    load_run_config,
    render_report_table,
    replay_file,
    run_headless,
    score_files,
    serve,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rehabsim",
        description="Deterministic desk-scale simulator and scoring suite "
        "for an EMG-driven hand rehabilitation system.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("sim", help="run a session headless")
    sim.add_argument("--config", help="run config JSON file")
    sim.add_argument("--seed", type=int, help="override the link seed")
    sim.add_argument("--trace", help="trace CSV path, or 'demo' for the bundled recording")
    sim.add_argument("--out", default=".", help="output directory (default: current)")

    replay = sub.add_parser("replay", help="re-execute a recorded session log")
    replay.add_argument("--log", required=True, help="session log CSV")
    replay.add_argument("--out", help="write the reproduced report JSON here")

    score = sub.add_parser("score", help="score an instrument response file")
    score.add_argument(
        "--instrument", required=True, help=f"one of: {', '.join(INSTRUMENTS)}"
    )
    score.add_argument("--in", dest="infile", required=True, help="response CSV")
    score.add_argument("--out", help="write the report JSON here instead of stdout")
    score.add_argument(
        "--format",
        choices=("json", "table"),
        default="json",
        help="stdout format (default json)",
    )

    serve_p = sub.add_parser("serve", help="serve a live session over HTTP")
    serve_p.add_argument("--config", help="run config JSON file")
    serve_p.add_argument("--port", type=int, default=8000, help="listen port (0 = ephemeral)")
    serve_p.add_argument("--host", default="127.0.0.1", help="listen address")
    serve_p.add_argument("--out", default=".", help="output directory for log and report")

    return parser


def _cmd_sim(args: argparse.Namespace) -> int:
    cfg = load_run_config(args.config, seed=args.seed, trace=args.trace)
    result, log_path, report_path = run_headless(cfg, out_dir=args.out)
    print(result.report.to_json())
    print(f"log: {log_path}", file=sys.stderr)
    print(f"report: {report_path}", file=sys.stderr)
    return EXIT_OK


def _cmd_replay(args: argparse.Namespace) -> int:
    result, verified = replay_file(args.log)
    text = result.report.to_json()
    print(text)
    if args.out:
        try:
            Path(args.out).write_text(text + "\n", encoding="utf-8")
        except OSError as e:
            raise InputError(f"cannot write {args.out}: {e}") from None
    status = "verified byte-identical" if verified else "log was not finalized; report reproduced"
    print(f"replay: {status}", file=sys.stderr)
    return EXIT_OK


def _cmd_score(args: argparse.Namespace) -> int:
    try:
        text = Path(args.infile).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {args.infile}: {e}") from None
    report = score_files(args.instrument, text)
    if args.out:
        try:
            Path(args.out).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
        except OSError as e:
            raise InputError(f"cannot write {args.out}: {e}") from None
    if args.format == "table":
        print(render_report_table(report))
    else:
        print(json.dumps(report, indent=2))
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    cfg = load_run_config(args.config)
    service, httpd = serve(cfg, host=args.host, port=args.port, out_dir=args.out)
    host, port = httpd.server_address[:2]
    print(f"serving on http://{host}:{port}", flush=True)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.shutdown()
        httpd.server_close()
        service.stop()
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "sim": _cmd_sim,
        "replay": _cmd_replay,
        "score": _cmd_score,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except ServiceError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
