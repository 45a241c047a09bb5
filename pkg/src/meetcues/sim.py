"""Meeting simulator: scripted traces, replay against the service or a live
server, and brute-force verification of engine outputs.

Trace format: NDJSON, one action per line, sorted by at_ms:

    {"at_ms": N, "actor": "name", "action": "...", "args": {...}}

Actions: join, like, clarify, comment, upvote, start, end, upload_audio.
at_ms is a virtual clock starting at 0; the meeting starts when the trace's
start action runs, so event timestamps are reproducible across replays.
"""

from __future__ import annotations

import hashlib
import json
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import httpx

from .domain import (
    CommentOrder,
    DomainValidationError,
    MeetCuesError,
    ReactionKind,
    SnippetConfig,
    canonical_json,
)
from . import oracle
from .mood import cloud_at, timeline
from .service import MeetCuesService
from .sessions import seeded_rand
from .snippets import merge_runs, select_buckets
from .summary import NullNotifier

SIM_TIME_HEADER = "x-sim-time-ms"
SIM_ACTIONS = {"join", "like", "clarify", "comment", "upvote", "start", "end", "upload_audio"}
DEFAULT_TITLE = "Simulated meeting"
DEFAULT_HOST = "sim-host"


@dataclass(frozen=True)
class TraceAction:
    at_ms: int
    actor: str
    action: str
    args: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"at_ms": self.at_ms, "actor": self.actor, "action": self.action, "args": self.args}


def parse_trace(lines: Sequence[str]) -> list[TraceAction]:
    actions: list[TraceAction] = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            raw = json.loads(line)
            action = TraceAction(
                at_ms=int(raw["at_ms"]),
                actor=str(raw.get("actor", "")),
                action=str(raw["action"]),
                args=dict(raw.get("args", {})),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise DomainValidationError(f"trace line {lineno}: {exc}") from exc
        if action.action not in SIM_ACTIONS:
            raise DomainValidationError(f"trace line {lineno}: unknown action {action.action!r}")
        if actions and action.at_ms < actions[-1].at_ms:
            raise DomainValidationError(f"trace line {lineno}: trace must be sorted by at_ms")
        actions.append(action)
    return actions


def load_trace(path: str | Path) -> list[TraceAction]:
    return parse_trace(Path(path).read_text(encoding="utf-8").splitlines())


def dump_trace(actions: Sequence[TraceAction]) -> str:
    return "".join(canonical_json(a.to_dict()) + "\n" for a in actions)


def actor_email(actor: str) -> str:
    return f"{actor}@sim.example"


# ---------------------------------------------------------------------------
# Trace generation
# ---------------------------------------------------------------------------


def generate_trace(
    attendees: int,
    duration_s: int,
    bursts: Sequence[tuple[int, int, int]],
    seed: int,
    record_audio: bool = False,
    audio_path: str | None = None,
) -> list[TraceAction]:
    """Deterministic synthetic meeting: joins, uniform bursts, bookended.

    Each burst is (start_s, end_s, events_per_minute); events spread
    uniformly over the window across random actors.
    """
    if attendees < 1:
        raise DomainValidationError("need at least one attendee")
    for start_s, end_s, _ in bursts:
        if not 0 <= start_s < end_s <= duration_s:
            raise DomainValidationError(f"burst ({start_s}, {end_s}) outside the meeting duration")
    rng = random.Random(seed)
    actors = [f"a{i:02d}" for i in range(attendees)]
    actions = [TraceAction(0, "host", "start")]
    for actor in actors:  # all joins at t=0, before any burst event can fire
        actions.append(TraceAction(0, actor, "join"))
    if record_audio:
        actions.append(TraceAction(0, "host", "upload_audio", {"path": audio_path or "recording.wav"}))
    events: list[TraceAction] = []
    comment_count = 0
    for start_s, end_s, per_min in bursts:
        count = max(1, round((end_s - start_s) * per_min / 60))
        for _ in range(count):
            at_ms = rng.randrange(start_s * 1000, end_s * 1000)
            actor = rng.choice(actors)
            roll = rng.random()
            if roll < 0.6:
                events.append(TraceAction(at_ms, actor, "like"))
            elif roll < 0.85:
                events.append(TraceAction(at_ms, actor, "clarify"))
            elif roll < 0.95 or comment_count == 0:
                comment_count += 1
                label = f"c{comment_count}"
                events.append(TraceAction(at_ms, actor, "comment", {"text": f"point {label}", "label": label}))
            else:
                label = f"c{rng.randint(1, comment_count)}"
                events.append(TraceAction(at_ms, actor, "upvote", {"label": label}))
    events.sort(key=lambda a: a.at_ms)
    # upvotes may have sorted ahead of their comment; drop those (rare)
    seen_labels: set[str] = set()
    for event in events:
        if event.action == "comment":
            seen_labels.add(event.args["label"])
        elif event.action == "upvote" and event.args["label"] not in seen_labels:
            continue
        actions.append(event)
    actions.append(TraceAction(duration_s * 1000, "host", "end"))
    return actions


# ---------------------------------------------------------------------------
# Replay targets
# ---------------------------------------------------------------------------


class ServiceTarget:
    """Drives a MeetCuesService directly (offline mode)."""

    def __init__(self, service: MeetCuesService) -> None:
        self.service = service
        self.meeting_id = ""
        self.hashtag = ""
        self._host_token = ""

    def create(self, title: str, recording_enabled: bool, at_ms: int) -> None:
        session, host = self.service.create_meeting(DEFAULT_HOST, title, recording_enabled, now_ms=at_ms)
        self.meeting_id, self.hashtag = session.meeting_id, session.hashtag
        self._host_token = host.token

    def join(self, actor: str, at_ms: int) -> str:
        return self.service.join_meeting(self.hashtag, actor_email(actor), now_ms=at_ms).token

    def start(self, at_ms: int) -> None:
        self.service.start_meeting(self._host_token, self.meeting_id, now_ms=at_ms)

    def end(self, at_ms: int) -> None:
        self.service.end_meeting(self._host_token, self.meeting_id, now_ms=at_ms, wait=True)

    def reaction(self, token: str, kind: str, at_ms: int) -> int:
        return self.service.submit_reaction(token, ReactionKind(kind), now_ms=at_ms).seq

    def comment(self, token: str, text: str, at_ms: int) -> tuple[int, str]:
        event = self.service.submit_comment(token, text, now_ms=at_ms)
        return event.seq, event.payload.comment_id

    def upvote(self, token: str, comment_id: str, at_ms: int) -> int:
        event, _ = self.service.upvote_comment(token, comment_id, now_ms=at_ms)
        return event.seq

    def upload_audio(self, data: bytes, offset_ms: int, at_ms: int) -> None:
        self.service.ingest_recording(self._host_token, self.meeting_id, data, offset_ms)

    def summary_bytes(self) -> bytes | None:
        return self.service.load_summary_bytes(self.meeting_id)

    def live_cloud_bytes(self, at_ms: int) -> bytes:
        return canonical_json(self.service.cloud_state(self.meeting_id, now_ms=at_ms).to_dict()).encode()


class HttpTarget:
    """Drives a live server over the wire API (simulation mode header)."""

    def __init__(self, base_url: str, timeout: float = 30.0) -> None:
        self.client = httpx.Client(base_url=base_url, timeout=timeout)
        self.meeting_id = ""
        self.hashtag = ""
        self._host_token = ""

    def _headers(self, at_ms: int, token: str | None = None) -> dict[str, str]:
        headers = {SIM_TIME_HEADER: str(at_ms)}
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def _check(self, response: httpx.Response) -> dict:
        if response.status_code >= 400:
            try:
                detail = response.json()
            except Exception:
                detail = {"error": "http", "message": response.text[:200]}
            raise MeetCuesError(f"{response.status_code}: {detail.get('error')}: {detail.get('message')}")
        return response.json() if response.content else {}

    def create(self, title: str, recording_enabled: bool, at_ms: int) -> None:
        body = {"host_id": DEFAULT_HOST, "title": title, "recording_enabled": recording_enabled}
        data = self._check(self.client.post("/api/meetings", json=body, headers=self._headers(at_ms)))
        self.meeting_id = data["meeting"]["meeting_id"]
        self.hashtag = data["meeting"]["hashtag"]
        self._host_token = data["host_token"]["token"]

    def join(self, actor: str, at_ms: int) -> str:
        data = self._check(
            self.client.post(
                f"/api/meetings/{self.hashtag}/join",
                json={"email": actor_email(actor)},
                headers=self._headers(at_ms),
            )
        )
        return data["token"]

    def start(self, at_ms: int) -> None:
        self._check(
            self.client.post(f"/api/meetings/{self.meeting_id}/start", headers=self._headers(at_ms, self._host_token))
        )

    def end(self, at_ms: int) -> None:
        self._check(
            self.client.post(
                f"/api/meetings/{self.meeting_id}/end",
                params={"wait": "true"},
                headers=self._headers(at_ms, self._host_token),
            )
        )

    def _event(self, token: str, body: dict, at_ms: int) -> dict:
        return self._check(
            self.client.post(
                f"/api/meetings/{self.meeting_id}/events",
                json=body,
                headers=self._headers(at_ms, token),
            )
        )

    def reaction(self, token: str, kind: str, at_ms: int) -> int:
        return self._event(token, {"type": "reaction", "kind": kind}, at_ms)["seq"]

    def comment(self, token: str, text: str, at_ms: int) -> tuple[int, str]:
        data = self._event(token, {"type": "comment", "text": text}, at_ms)
        return data["seq"], data["payload"]["comment_id"]

    def upvote(self, token: str, comment_id: str, at_ms: int) -> int:
        return self._event(token, {"type": "upvote", "comment_id": comment_id}, at_ms)["seq"]

    def upload_audio(self, data: bytes, offset_ms: int, at_ms: int) -> None:
        response = self.client.put(
            f"/api/meetings/{self.meeting_id}/recording",
            params={"offset_ms": str(offset_ms)},
            content=data,
            headers={**self._headers(at_ms, self._host_token), "content-type": "audio/wav"},
        )
        self._check(response)

    def summary_bytes(self) -> bytes | None:
        response = self.client.get(f"/api/meetings/{self.meeting_id}/summary")
        return response.content if response.status_code == 200 else None

    def live_cloud_bytes(self, at_ms: int) -> bytes:
        response = self.client.get(f"/api/meetings/{self.meeting_id}/state", headers=self._headers(at_ms))
        return response.content


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------


@dataclass
class RunReport:
    meeting_id: str
    hashtag: str
    actions_total: int
    actions_ok: int
    outcomes: list[dict]
    state_digest: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "meeting_id": self.meeting_id,
            "hashtag": self.hashtag,
            "actions_total": self.actions_total,
            "actions_ok": self.actions_ok,
            "outcomes": self.outcomes,
            "state_digest": self.state_digest,
        }


def simulate(
    actions: Sequence[TraceAction],
    target: ServiceTarget | HttpTarget,
    speed: float = float("inf"),
    title: str = DEFAULT_TITLE,
    trace_dir: Path | None = None,
) -> RunReport:
    """Replay a trace against a target; rejections are recorded, not fatal.

    Offline replay always runs at serialization speed; for a live target,
    consecutive actions are spaced by their at_ms delta divided by `speed`.
    """
    recording = any(a.action == "upload_audio" for a in actions)
    target.create(title, recording, at_ms=0)
    tokens: dict[str, str] = {}
    labels: dict[str, str] = {}
    outcomes: list[dict] = []
    pace = speed if isinstance(target, HttpTarget) else float("inf")
    last_at = 0
    for action in actions:
        if pace != float("inf") and action.at_ms > last_at:
            time.sleep((action.at_ms - last_at) / 1000 / pace)
        last_at = action.at_ms
        outcome: dict[str, Any] = {"at_ms": action.at_ms, "actor": action.actor, "action": action.action}
        try:
            if action.action == "join":
                tokens[action.actor] = target.join(action.actor, action.at_ms)
            elif action.action == "start":
                target.start(action.at_ms)
            elif action.action == "end":
                target.end(action.at_ms)
            elif action.action in ("like", "clarify"):
                outcome["seq"] = target.reaction(_token(tokens, action.actor), action.action, action.at_ms)
            elif action.action == "comment":
                seq, comment_id = target.comment(
                    _token(tokens, action.actor), action.args.get("text", "..."), action.at_ms
                )
                outcome["seq"] = seq
                label = action.args.get("label")
                if label:
                    labels[label] = comment_id
            elif action.action == "upvote":
                comment_id = action.args.get("comment_id") or labels.get(action.args.get("label", ""))
                if comment_id is None:
                    raise DomainValidationError(f"upvote references unknown label {action.args.get('label')!r}")
                outcome["seq"] = target.upvote(_token(tokens, action.actor), comment_id, action.at_ms)
            elif action.action == "upload_audio":
                path = Path(action.args.get("path", "recording.wav"))
                if trace_dir is not None and not path.is_absolute():
                    path = trace_dir / path
                target.upload_audio(path.read_bytes(), int(action.args.get("offset_ms", 0)), action.at_ms)
            outcome["ok"] = True
        except Exception as exc:
            outcome["ok"] = False
            outcome["error"] = str(exc)
        outcomes.append(outcome)
    summary = target.summary_bytes()
    digest_input = summary if summary is not None else target.live_cloud_bytes(last_at)
    return RunReport(
        meeting_id=target.meeting_id,
        hashtag=target.hashtag,
        actions_total=len(outcomes),
        actions_ok=sum(1 for o in outcomes if o["ok"]),
        outcomes=outcomes,
        state_digest=hashlib.sha256(digest_input).hexdigest(),
    )


def _token(tokens: dict[str, str], actor: str) -> str:
    token = tokens.get(actor)
    if token is None:
        raise DomainValidationError(f"actor {actor!r} acted before joining")
    return token


def simulate_offline(
    actions: Sequence[TraceAction],
    data_dir: Path,
    config: SnippetConfig | None = None,
    seed: int = 0,
    trace_dir: Path | None = None,
) -> tuple[RunReport, MeetCuesService]:
    """Replay against a fresh service; the caller may inspect it afterwards."""
    service = MeetCuesService(
        data_dir,
        config=config,
        rand=seeded_rand(seed),
        notifier=NullNotifier(),
        fsync=False,
    )
    target = ServiceTarget(service)
    report = simulate(actions, target, trace_dir=trace_dir)
    return report, service


# ---------------------------------------------------------------------------
# Oracle verification
# ---------------------------------------------------------------------------


@dataclass
class VerifyReport:
    passed: bool
    checks: list[dict]
    state_digest: str

    def to_dict(self) -> dict[str, Any]:
        return {"passed": self.passed, "checks": self.checks, "state_digest": self.state_digest}


def verify(
    actions: Sequence[TraceAction],
    data_dir: Path,
    config: SnippetConfig | None = None,
    seed: int = 0,
    horizon_count: int = 8,
) -> VerifyReport:
    """Replay offline, then recompute everything with the brute-force oracles."""
    cfg = config or SnippetConfig()
    run, service = simulate_offline(actions, data_dir, cfg, seed)
    runtime = service._runtime(run.meeting_id)
    events, joins = runtime.events, runtime.joins
    session = runtime.session
    duration_ms = session.duration_ms or (events[-1].ts_ms if events else 0)
    duration_s = max(duration_ms / 1000, cfg.bucket_s)
    checks: list[dict] = []

    def check(name: str, engine, expected) -> None:
        ok = engine == expected
        entry = {"check": name, "ok": ok}
        if not ok:
            entry["engine"] = _shorten(engine)
            entry["expected"] = _shorten(expected)
        checks.append(entry)

    buckets = timeline(events, duration_s, cfg)
    counts = oracle.bucket_counts(events, duration_s, cfg.bucket_s)
    check("bucket_counts", [(b.reactions, b.comments, b.upvotes) for b in buckets], counts)
    check("bucket_norms", [b.norm for b in buckets], oracle.normalized_engagement(counts, cfg.weights, cfg.normalization))
    mask = select_buckets(buckets, cfg.threshold)
    check("threshold_mask", mask, oracle.threshold_mask([b.norm for b in buckets], cfg.threshold))
    check(
        "snippet_intervals",
        merge_runs(mask, cfg.bucket_s, cfg.pad_s, duration_s),
        oracle.snippet_intervals(events, duration_s, cfg),
    )
    rng = random.Random(seed + 1)
    horizons = sorted(rng.randint(0, duration_ms) for _ in range(horizon_count)) + [duration_ms]
    for at_ms in horizons:
        cloud = cloud_at(run.meeting_id, events, joins, at_ms)
        tallies, version, joined = oracle.fold_cloud_counts(events, joins, at_ms)
        engine_view = {e.attendee.hex: (e.like_count, e.clarify_count, e.comment_count) for e in cloud.emojis}
        oracle_view = {a.hex: tallies.get(a, (0, 0, 0)) for a in joined}
        check(f"cloud_at_{at_ms}", (cloud.version, engine_view), (version, oracle_view))
    chrono, popular = oracle.comment_orderings(events)
    check("comments_chrono", [c.comment_id for c in runtime.comment_entries(CommentOrder.CHRONO)], chrono)
    check("comments_popular", [c.comment_id for c in runtime.comment_entries(CommentOrder.POPULARITY)], popular)
    return VerifyReport(passed=all(c["ok"] for c in checks), checks=checks, state_digest=run.state_digest)


def _shorten(value: Any, limit: int = 400) -> Any:
    text = repr(value)
    return text if len(text) <= limit else text[:limit] + "..."
