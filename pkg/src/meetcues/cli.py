"""Command line entry points: serve, simulate, generate, verify, summarize,
snippets."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import tempfile
from pathlib import Path

from .domain import Event, MeetCuesError, MeetingSession, MeetingState, SnippetConfig, canonical_json
from .service import MeetCuesService
from .sessions import seeded_rand

logger = logging.getLogger(__name__)


def _config_from_args(args: argparse.Namespace) -> SnippetConfig:
    return SnippetConfig(
        bucket_s=getattr(args, "bucket_seconds", 60),
        threshold=getattr(args, "snippet_threshold", 0.3),
        normalization=getattr(args, "normalization", "max"),
        pad_s=getattr(args, "pad_seconds", 0.0),
    )


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    host, _, port = args.listen.rpartition(":")
    rand = seeded_rand(args.sim_seed) if args.simulation and args.sim_seed is not None else None
    service = MeetCuesService(
        args.data_dir,
        config=_config_from_args(args),
        rand=rand,
        base_url=args.base_url or f"http://{args.listen}",
    )
    app = create_app(
        service,
        simulation=args.simulation,
        push_latency_budget_ms=args.push_latency_budget_ms,
    )
    logger.info("serving on %s (data dir %s)", args.listen, args.data_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    from .sim import dump_trace, generate_trace

    bursts = []
    for spec in args.burst or []:
        try:
            start_s, end_s, per_min = (int(x) for x in spec.split(":"))
        except ValueError:
            print(f"bad burst {spec!r}; expected start:end:events_per_min", file=sys.stderr)
            return 2
        bursts.append((start_s, end_s, per_min))
    actions = generate_trace(
        args.attendees,
        args.duration,
        bursts,
        args.seed,
        record_audio=args.record_audio is not None,
        audio_path=args.record_audio,
    )
    out = Path(args.out)
    out.write_text(dump_trace(actions), encoding="utf-8")
    print(f"wrote {len(actions)} actions to {out}")
    return 0


def _parse_speed(value: str) -> float:
    if value.lower() in ("inf", "max"):
        return float("inf")
    speed = float(value)
    if speed < 1:
        raise ValueError("speed must be >= 1")
    return speed


def cmd_simulate(args: argparse.Namespace) -> int:
    from .sim import HttpTarget, load_trace, simulate, simulate_offline

    actions = load_trace(args.trace)
    trace_dir = Path(args.trace).resolve().parent
    speed = _parse_speed(args.speed)
    if args.target == "offline":
        data_dir = Path(args.data_dir) if args.data_dir else Path(tempfile.mkdtemp(prefix="meetcues-sim-"))
        report, service = simulate_offline(
            actions, data_dir, _config_from_args(args), seed=args.seed, trace_dir=trace_dir
        )
        service.close()
    else:
        report = simulate(actions, HttpTarget(args.target), speed=speed, trace_dir=trace_dir)
    payload = canonical_json(report.to_dict())
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    failed = report.actions_total - report.actions_ok
    print(f"{report.actions_ok}/{report.actions_total} actions ok; digest {report.state_digest[:16]}")
    if failed:
        for outcome in report.outcomes:
            if not outcome["ok"]:
                print(f"  FAILED {outcome['action']}@{outcome['at_ms']}: {outcome.get('error')}", file=sys.stderr)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    from .sim import load_trace, verify

    actions = load_trace(args.trace)
    with tempfile.TemporaryDirectory(prefix="meetcues-verify-") as tmp:
        report = verify(actions, Path(tmp), _config_from_args(args), seed=args.seed)
    for check in report.checks:
        status = "ok" if check["ok"] else "MISMATCH"
        print(f"  {check['check']}: {status}")
        if not check["ok"]:
            print(f"    engine:   {check['engine']}")
            print(f"    expected: {check['expected']}")
    print("PASS" if report.passed else "FAIL")
    return 0 if report.passed else 1


def cmd_summarize(args: argparse.Namespace) -> int:
    from .figures import write_report_files
    from .summary import render_html

    service = MeetCuesService(args.data_dir, config=_config_from_args(args))
    try:
        if args.regenerate or service.summary_status(args.meeting) != "ready":
            service.finalize(args.meeting, regenerate=args.regenerate)
        report = service.load_summary(args.meeting)
    finally:
        service.close()
    out_dir = Path(args.out) if args.out else service.store.meeting_dir(args.meeting)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {"summary_json": service.store.summary_path(args.meeting)}
    html_path = out_dir / "summary.html"
    html_path.write_text(render_html(report), encoding="utf-8")
    outputs["summary_html"] = html_path
    if not args.no_figures:
        outputs.update(write_report_files(report, out_dir, threshold=args.snippet_threshold))
    for name, path in outputs.items():
        print(f"{name}: {path}")
    return 0


def cmd_snippets(args: argparse.Namespace) -> int:
    from .figures import write_timeline_csv
    from .mood import timeline
    from .snippets import extract_snippets

    events = [
        Event.from_dict(json.loads(line))
        for line in Path(args.events).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    config = _config_from_args(args)
    if args.duration is not None:
        duration_s = args.duration
    elif events:
        duration_s = math.ceil(events[-1].ts_ms / 1000 / config.bucket_s) * config.bucket_s
    else:
        print("no events and no --duration; nothing to do", file=sys.stderr)
        return 2
    session = MeetingSession(
        meeting_id="offline",
        hashtag="snipit",
        title=Path(args.events).stem or "offline extraction",
        host_id="cli",
        recording_enabled=True,
        salt=b"\x00" * 16,
        state=MeetingState.ENDED,
        started_at=0,
        ended_at=duration_s * 1000,
    )
    out_dir = Path(args.out)
    extracted = extract_snippets(events, Path(args.audio), session, config, out_dir)
    write_timeline_csv(timeline(events, duration_s, config), out_dir / "timeline.csv")
    print(canonical_json([s.to_dict() for s in extracted]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="meetcues", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--snippet-threshold", type=float, default=0.3)
        p.add_argument("--bucket-seconds", type=int, default=60)
        p.add_argument("--pad-seconds", type=float, default=0.0)
        p.add_argument("--normalization", choices=["max", "total"], default="max")

    p = sub.add_parser("serve", help="run the HTTP server")
    p.add_argument("--listen", default="127.0.0.1:8400")
    p.add_argument("--data-dir", default="./data")
    p.add_argument("--push-latency-budget-ms", type=int, default=1000)
    p.add_argument("--simulation", action="store_true", help="accept the trusted simulated-time header")
    p.add_argument("--sim-seed", type=int, default=None, help="deterministic ids (simulation only)")
    p.add_argument("--base-url", default=None)
    add_config_flags(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("simulate", help="replay a trace against a server or offline")
    p.add_argument("--trace", required=True)
    p.add_argument("--target", default="offline", help="server base URL, or 'offline'")
    p.add_argument("--speed", default="inf", help="time compression factor, or 'inf'")
    p.add_argument("--data-dir", default=None, help="offline mode data dir (default: temp)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write the run report JSON here")
    add_config_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("generate", help="write a synthetic meeting trace")
    p.add_argument("--attendees", type=int, required=True)
    p.add_argument("--duration", type=int, required=True, help="meeting length in seconds")
    p.add_argument("--burst", action="append", metavar="START:END:RATE", help="seconds and events/min")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--record-audio", default=None, help="WAV path to upload during the trace")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", help="replay a trace and cross-check against the oracles")
    p.add_argument("--trace", required=True)
    p.add_argument("--seed", type=int, default=0)
    add_config_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("summarize", help="build/refresh the report files for a meeting")
    p.add_argument("--meeting", required=True)
    p.add_argument("--data-dir", default="./data")
    p.add_argument("--out", default=None, help="directory for html/csv/figures (default: meeting dir)")
    p.add_argument("--regenerate", action="store_true")
    p.add_argument("--no-figures", action="store_true")
    add_config_flags(p)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("snippets", help="offline snippet extraction from an event log + WAV")
    p.add_argument("--events", required=True, help="events.ndjson file")
    p.add_argument("--audio", required=True, help="meeting recording WAV")
    p.add_argument("--duration", type=int, default=None, help="meeting length in seconds")
    p.add_argument("--out", default="./snippets-out")
    add_config_flags(p)
    p.set_defaults(func=cmd_snippets)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MeetCuesError as exc:
        print(f"error ({exc.code}): {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
