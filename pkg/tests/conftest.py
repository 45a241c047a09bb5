"""Shared builders for tests: deterministic ids, events, random traces, and
a real uvicorn server harness for push-channel tests."""

from __future__ import annotations

import contextlib
import random
import socket
import threading
import time

import httpx
import pytest

from meetcues.domain import (
    AttendeeId,
    CommentPayload,
    Event,
    JoinRecord,
    ReactionKind,
    ReactionPayload,
    UpvotePayload,
)


def attendee(i: int) -> AttendeeId:
    return AttendeeId(f"{i:032x}")


class EventBuilder:
    """Assigns contiguous seq values and keeps timestamps monotone."""

    def __init__(self) -> None:
        self.seq = 0
        self.last_ts = 0
        self.events: list[Event] = []

    def _next(self, ts_ms: int) -> tuple[int, int]:
        self.seq += 1
        self.last_ts = max(self.last_ts, ts_ms)
        return self.seq, self.last_ts

    def like(self, who: int, ts_ms: int) -> Event:
        return self._add(who, ts_ms, ReactionPayload(ReactionKind.LIKE))

    def clarify(self, who: int, ts_ms: int) -> Event:
        return self._add(who, ts_ms, ReactionPayload(ReactionKind.CLARIFY))

    def comment(self, who: int, ts_ms: int, comment_id: str | None = None, text: str = "hm") -> Event:
        cid = comment_id or f"c{self.seq + 1}"
        return self._add(who, ts_ms, CommentPayload(cid, text))

    def upvote(self, who: int, ts_ms: int, comment_id: str) -> Event:
        return self._add(who, ts_ms, UpvotePayload(comment_id))

    def _add(self, who: int, ts_ms: int, payload) -> Event:
        seq, ts = self._next(ts_ms)
        event = Event(seq=seq, ts_ms=ts, attendee=attendee(who), payload=payload)
        self.events.append(event)
        return event


def random_trace(
    rng: random.Random,
    duration_s: int,
    n_attendees: int,
    with_upvotes: bool = True,
) -> tuple[list[Event], list[JoinRecord]]:
    """A random meeting: bursty reactions/comments/upvotes plus join records."""
    joins = [JoinRecord(attendee=attendee(i), ts_ms=rng.randint(0, duration_s * 200)) for i in range(n_attendees)]
    builder = EventBuilder()
    times: list[int] = []
    for _ in range(rng.randint(0, 4)):  # bursts
        burst_start = rng.randint(0, max(0, duration_s - 60))
        burst_len = rng.randint(30, min(duration_s, 20 * 60))
        rate_per_min = rng.randint(1, 60)
        count = max(1, (burst_len * rate_per_min) // 60)
        for _ in range(count):
            times.append(rng.randint(burst_start, min(duration_s, burst_start + burst_len)) * 1000)
    times.sort()
    comment_ids: list[str] = []
    for ts in times:
        who = rng.randrange(n_attendees)
        roll = rng.random()
        if roll < 0.55:
            builder.like(who, ts)
        elif roll < 0.8:
            builder.clarify(who, ts)
        elif roll < 0.95 or not (with_upvotes and comment_ids):
            event = builder.comment(who, ts)
            comment_ids.append(event.payload.comment_id)
        else:
            builder.upvote(who, ts, rng.choice(comment_ids))
    return builder.events, joins


@pytest.fixture
def builder() -> EventBuilder:
    return EventBuilder()


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class StreamReader(threading.Thread):
    """Collects SSE data frames from a live server in the background."""

    def __init__(self, base_url: str, meeting_id: str, token: str) -> None:
        super().__init__(daemon=True)
        self.url = f"{base_url}/api/meetings/{meeting_id}/stream?token={token}"
        self.frames: list[dict] = []
        self.arrival_s: list[float] = []
        self.status: int | None = None
        self.done = threading.Event()

    def run(self) -> None:
        import json

        try:
            with httpx.stream("GET", self.url, timeout=30) as response:
                self.status = response.status_code
                if response.status_code != 200:
                    return
                for line in response.iter_lines():
                    if line.startswith("data: "):
                        self.frames.append(json.loads(line[6:]))
                        self.arrival_s.append(time.monotonic())
                        if self.frames[-1].get("event") == "ended":
                            return
        finally:
            self.done.set()

    def versions(self) -> list[int]:
        return [f["version"] for f in self.frames if "version" in f]

    def version_arrivals(self) -> list[tuple[int, float]]:
        return [
            (f["version"], t)
            for f, t in zip(self.frames, self.arrival_s)
            if "version" in f
        ]


@contextlib.contextmanager
def run_live_server(app):
    """Serve a FastAPI app on an ephemeral port in a daemon thread."""
    import uvicorn

    port = free_port()
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    base_url = f"http://127.0.0.1:{port}"
    deadline = time.time() + 10
    while time.time() < deadline:
        try:
            httpx.get(f"{base_url}/healthz", timeout=1)
            break
        except httpx.TransportError:
            time.sleep(0.05)
    else:  # pragma: no cover - startup failure diagnostics
        raise RuntimeError("live server did not come up")
    try:
        yield base_url
    finally:
        server.should_exit = True
        thread.join(timeout=5)
