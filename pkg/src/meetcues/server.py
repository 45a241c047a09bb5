"""HTTP + server-push surface over the application service.

Sync endpoints run in the framework threadpool and serialize through the
service's per-meeting locks; the push channel is Server-Sent Events on a
long-lived GET. Ingest never waits on subscribers: acknowledgments only
schedule a wake-up on the event loop, and each connection coalesces bursts
by always sending the latest cloud with a strictly increasing version.
"""

from __future__ import annotations

import asyncio
import logging
from collections import deque
from contextlib import asynccontextmanager
from typing import Any

from fastapi import Body, FastAPI, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, HTMLResponse, StreamingResponse
from starlette.concurrency import run_in_threadpool

from .domain import (
    CommentOrder,
    DomainValidationError,
    MeetCuesError,
    MeetingState,
    ReactionKind,
    UnauthorizedError,
    canonical_json,
)
from .service import MeetCuesService
from .summary import render_html

logger = logging.getLogger(__name__)

SIM_TIME_HEADER = "x-sim-time-ms"

_STATUS_BY_CODE = {
    "validation": 400,
    "decode": 400,
    "unauthorized": 401,
    "forbidden": 403,
    "not_found": 404,
    "conflict": 409,
    "gone": 410,
    "corruption": 500,
    "internal": 500,
}


def canonical_response(content: Any, status_code: int = 200) -> Response:
    return Response(
        content=canonical_json(content),
        status_code=status_code,
        media_type="application/json",
    )


def _sse_frame(payload: dict) -> str:
    return f"data: {canonical_json(payload)}\n\n"


class _Subscriber:
    __slots__ = ("wake", "dirty", "specials")

    def __init__(self) -> None:
        self.wake = asyncio.Event()
        self.dirty = False
        self.specials: deque[dict] = deque()


class Broadcaster:
    """Fans service push messages out to SSE subscribers, loop-side only."""

    def __init__(self) -> None:
        self.loop: asyncio.AbstractEventLoop | None = None
        self._subscribers: dict[str, set[_Subscriber]] = {}

    def subscribe(self, meeting_id: str) -> _Subscriber:
        sub = _Subscriber()
        self._subscribers.setdefault(meeting_id, set()).add(sub)
        return sub

    def unsubscribe(self, meeting_id: str, sub: _Subscriber) -> None:
        self._subscribers.get(meeting_id, set()).discard(sub)

    def on_message(self, meeting_id: str, message: dict) -> None:
        """Called from ingest worker threads; must never block."""
        loop = self.loop
        if loop is not None and not loop.is_closed():
            loop.call_soon_threadsafe(self._dispatch, meeting_id, message)

    def _dispatch(self, meeting_id: str, message: dict) -> None:
        for sub in self._subscribers.get(meeting_id, ()):  # loop thread only
            if message.get("type") == "state":
                sub.dirty = True
            else:
                sub.specials.append(message)
            sub.wake.set()


def create_app(
    service: MeetCuesService,
    *,
    simulation: bool = False,
    push_latency_budget_ms: int = 1000,
    heartbeat_s: float = 15.0,
    cors_origins: list[str] | None = None,
) -> FastAPI:
    broadcaster = Broadcaster()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        broadcaster.loop = asyncio.get_running_loop()
        service.add_listener(broadcaster.on_message)
        try:
            yield
        finally:
            service.remove_listener(broadcaster.on_message)

    app = FastAPI(title="meetcues", lifespan=lifespan)
    app.state.service = service
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(MeetCuesError)
    async def domain_error(request: Request, exc: MeetCuesError) -> Response:
        status = _STATUS_BY_CODE.get(exc.code, 500)
        return canonical_response({"error": exc.code, "message": str(exc)}, status)

    @app.exception_handler(RequestValidationError)
    async def body_error(request: Request, exc: RequestValidationError) -> Response:
        return canonical_response({"error": "validation", "message": str(exc.errors()[:1])}, 400)

    def now_ms(request: Request) -> int | None:
        """Simulation-only trusted clock override; ignored in production."""
        if not simulation:
            return None
        value = request.headers.get(SIM_TIME_HEADER)
        return int(value) if value is not None else None

    def require_token(request: Request) -> str:
        # Query-param tokens exist for EventSource, which cannot set headers.
        auth = request.headers.get("authorization", "")
        if auth.lower().startswith("bearer "):
            return auth[7:].strip()
        token = request.query_params.get("token")
        if token:
            return token
        raise UnauthorizedError("missing bearer token")

    # -- endpoint group 1: accounts / sessions --------------------------------

    @app.post("/api/meetings")
    def create_meeting(request: Request, body: dict = Body(...)) -> Response:
        title = body.get("title", "")
        host_id = body.get("host_id") or "host"
        recording = bool(body.get("recording_enabled", False))
        session, host_token = service.create_meeting(host_id, title, recording, now_ms=now_ms(request))
        return canonical_response(
            {"meeting": session.to_dict(), "host_token": host_token.to_dict()}, 201
        )

    @app.post("/api/meetings/{hashtag}/join")
    def join_meeting(hashtag: str, request: Request, body: dict = Body(...)) -> Response:
        token = service.join_meeting(hashtag, str(body.get("email", "")), now_ms=now_ms(request))
        return canonical_response(token.to_dict())

    @app.get("/api/meetings/{meeting_id}")
    def get_meeting(meeting_id: str, request: Request) -> Response:
        service.resolve_any(require_token(request), meeting_id)
        return canonical_response(service.meeting(meeting_id).to_dict())

    @app.post("/api/meetings/{meeting_id}/start")
    def start_meeting(meeting_id: str, request: Request) -> Response:
        session = service.start_meeting(require_token(request), meeting_id, now_ms=now_ms(request))
        return canonical_response(session.to_dict())

    @app.post("/api/meetings/{meeting_id}/end")
    def end_meeting(meeting_id: str, request: Request, wait: bool = Query(False)) -> Response:
        session = service.end_meeting(
            require_token(request), meeting_id, now_ms=now_ms(request), wait=wait
        )
        return canonical_response(session.to_dict())

    # -- endpoint group 2: store interactions ----------------------------------

    @app.post("/api/meetings/{meeting_id}/events")
    def submit_event(meeting_id: str, request: Request, body: dict = Body(...)) -> Response:
        token = require_token(request)
        bound = service.resolve_attendee(token)
        if bound.meeting_id != meeting_id:
            raise UnauthorizedError("token is not valid for this meeting")
        kind = body.get("type")
        at = now_ms(request)
        if kind == "reaction":
            try:
                reaction = ReactionKind(body.get("kind"))
            except ValueError as exc:
                raise DomainValidationError(f"unknown reaction kind {body.get('kind')!r}") from exc
            event = service.submit_reaction(token, reaction, now_ms=at)
        elif kind == "comment":
            event = service.submit_comment(token, str(body.get("text", "")), now_ms=at)
        elif kind == "upvote":
            event, _created = service.upvote_comment(token, str(body.get("comment_id", "")), now_ms=at)
        else:
            raise DomainValidationError(f"unknown event type {kind!r}")
        return canonical_response(event.to_dict())

    # -- audio broker -----------------------------------------------------------

    @app.put("/api/meetings/{meeting_id}/recording")
    async def upload_recording(
        meeting_id: str, request: Request, offset_ms: int = Query(0, ge=0)
    ) -> Response:
        token = require_token(request)
        data = await request.body()
        await run_in_threadpool(service.ingest_recording, token, meeting_id, data, offset_ms)
        return canonical_response({"status": "stored", "bytes": len(data), "offset_ms": offset_ms})

    # -- endpoint group 3: retrieve state ----------------------------------------

    @app.get("/api/meetings/{meeting_id}/state")
    def get_state(
        meeting_id: str,
        request: Request,
        at_ms: int | None = Query(None, ge=0),
    ) -> Response:
        service.resolve_any(require_token(request), meeting_id)
        cloud = service.cloud_state(meeting_id, at_ms=at_ms, now_ms=now_ms(request))
        return canonical_response(cloud.to_dict())

    @app.get("/api/meetings/{meeting_id}/comments")
    def get_comments(meeting_id: str, request: Request, order: str = Query("chrono")) -> Response:
        service.resolve_any(require_token(request), meeting_id)
        try:
            parsed = CommentOrder(order)
        except ValueError as exc:
            raise DomainValidationError(f"unknown order {order!r}") from exc
        entries = service.list_comments(meeting_id, parsed)
        return canonical_response([c.to_dict() for c in entries])

    @app.get("/api/meetings/{meeting_id}/timeline")
    def get_timeline(meeting_id: str, request: Request) -> Response:
        service.resolve_any(require_token(request), meeting_id)
        buckets = service.timeline_of(meeting_id, now_ms=now_ms(request))
        return canonical_response([b.to_dict() for b in buckets])

    # -- endpoint group 4: summaries ----------------------------------------------

    @app.post("/api/meetings/{meeting_id}/summary")
    def regenerate_summary(meeting_id: str, request: Request) -> Response:
        service.resolve_host(require_token(request), meeting_id)
        report = service.finalize(meeting_id, regenerate=True)
        return canonical_response(report.to_dict())

    @app.get("/api/meetings/{meeting_id}/summary")
    def get_summary(meeting_id: str) -> Response:
        raw = service.load_summary_bytes(meeting_id)
        if raw is None:
            # not ready yet, whether the meeting is still running or the
            # pipeline is in flight; clients poll on "pending" either way
            return canonical_response({"status": "pending"}, 404)
        return Response(content=raw, media_type="application/json")

    @app.get("/api/meetings/{meeting_id}/snippets/{index}")
    def get_snippet(meeting_id: str, index: int) -> FileResponse:
        path = service.snippet_file(meeting_id, index)
        return FileResponse(path, media_type="audio/wav")

    @app.get("/summary/{meeting_id}", response_class=HTMLResponse)
    def summary_page(meeting_id: str) -> HTMLResponse:
        report = service.load_summary(meeting_id)
        return HTMLResponse(render_html(report))

    # -- push channel ---------------------------------------------------------------

    @app.get("/api/meetings/{meeting_id}/stream")
    async def stream(meeting_id: str, request: Request) -> StreamingResponse:
        token = require_token(request)
        service.resolve_any(token, meeting_id)
        at = now_ms(request)

        # The latency budget bounds how long a missed wake-up could go
        # unnoticed: idle ticks re-check the meeting's seq and resync.
        tick_s = min(heartbeat_s, max(0.05, push_latency_budget_ms / 1000))

        async def event_source():
            sub = broadcaster.subscribe(meeting_id)
            try:
                session = service.meeting(meeting_id)
                if session.state is MeetingState.ENDED:
                    yield _sse_frame({"event": "ended"})
                    return
                cloud = await run_in_threadpool(service.cloud_state, meeting_id, None, at)
                last_version = cloud.version
                yield _sse_frame({"version": cloud.version, "cloud": cloud.to_dict()})
                while True:
                    try:
                        await asyncio.wait_for(sub.wake.wait(), timeout=tick_s)
                    except asyncio.TimeoutError:
                        if service.last_seq(meeting_id) > last_version:
                            sub.dirty = True
                        elif service.meeting(meeting_id).state is MeetingState.ENDED:
                            sub.specials.append({"type": "ended"})
                        else:
                            yield ": keep-alive\n\n"
                            continue
                    sub.wake.clear()
                    send_state = sub.dirty
                    sub.dirty = False
                    specials = []
                    while sub.specials:
                        specials.append(sub.specials.popleft())
                    if send_state:
                        cloud = await run_in_threadpool(service.cloud_state, meeting_id, None, at)
                        if cloud.version > last_version:
                            last_version = cloud.version
                            yield _sse_frame({"version": cloud.version, "cloud": cloud.to_dict()})
                    ended = False
                    for message in specials:
                        if message.get("type") == "recording":
                            yield _sse_frame({"recording": bool(message.get("value"))})
                        elif message.get("type") == "ended":
                            ended = True
                    if ended:
                        yield _sse_frame({"event": "ended"})
                        return
            finally:
                broadcaster.unsubscribe(meeting_id, sub)

        return StreamingResponse(
            event_source(),
            media_type="text/event-stream",
            headers={"cache-control": "no-cache", "x-accel-buffering": "no"},
        )

    @app.get("/healthz")
    def healthz() -> Response:
        return canonical_response({"status": "ok", "meetings": len(service.meeting_ids())})

    return app
