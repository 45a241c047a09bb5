"""The application core: one object wiring sessions, ingest, storage,
mood state, the snippet/summary pipeline, and push notifications.

Both the HTTP layer and the offline simulator drive this class directly,
so transport adds no semantics. Every mutation of one meeting serializes
through that meeting's runtime lock; acceptance of an event is
validate -> assign seq -> durable append -> commit -> acknowledge.

`now_ms` parameters are trusted epoch-milliseconds overrides used by
simulation only; when None, the wall clock is used.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from pathlib import Path
from typing import Callable

from . import audio, snippets, summary
from .domain import (
    AttendeeId,
    AudioDecodeError,
    CloudState,
    CommentEntry,
    CommentOrder,
    ConflictError,
    Event,
    ForbiddenError,
    GoneError,
    JoinRecord,
    MeetingSession,
    MeetingState,
    NotFoundError,
    ReactionKind,
    SnippetConfig,
    SummaryReport,
    TimelineBucket,
    UnauthorizedError,
)
from .ingest import MeetingRuntime
from .mood import cloud_at as batch_cloud_at, timeline as build_timeline
from .sessions import (
    RandBytes,
    SessionToken,
    derive_attendee_id,
    host_principal,
    new_comment_id,
    new_meeting,
    new_token_value,
    secure_rand,
    validate_email,
)
from .store import EventStore
from .summary import FileOutboxNotifier, Notifier, notify_attendees

logger = logging.getLogger(__name__)

# Push listener: receives (meeting_id, message); messages are
# {"type": "state", "version": N} | {"type": "recording", "value": bool}
# | {"type": "ended"}.
PushListener = Callable[[str, dict], None]


def _wall_ms() -> int:
    return int(time.time() * 1000)


class MeetCuesService:
    """Composition root for one deployment's data directory."""

    def __init__(
        self,
        data_dir: str | Path,
        config: SnippetConfig | None = None,
        *,
        rand: RandBytes | None = None,
        clock: Callable[[], int] = _wall_ms,
        notifier: Notifier | None = None,
        fsync: bool = True,
        base_url: str = "http://localhost:8400",
    ) -> None:
        self.store = EventStore(data_dir, fsync=fsync)
        self.config = config or SnippetConfig()
        self.clock = clock
        self.base_url = base_url.rstrip("/")
        self._rand = rand or secure_rand()
        self.notifier = notifier if notifier is not None else FileOutboxNotifier(self.store.outbox_dir)
        self._registry_lock = threading.Lock()
        self._runtimes: dict[str, MeetingRuntime] = {}
        self._by_hashtag: dict[str, str] = {}
        self._tokens: dict[str, SessionToken] = {}
        self._host_tokens: dict[str, str] = {}  # token value -> meeting_id
        self._listeners: list[PushListener] = []
        self._pipeline_locks: dict[str, threading.Lock] = {}
        self._recover()

    # -- recovery --------------------------------------------------------------

    def _recover(self) -> None:
        for session in self.store.load_meetings():
            events = self.store.replay(session.meeting_id)
            joins = self.store.replay_joins(session.meeting_id)
            runtime = MeetingRuntime.from_log(session, events, joins)
            recording = audio.load_recording(self.store, session.meeting_id)
            if recording is not None:
                runtime.recording_offset_ms = recording[1]
                runtime.recording_active = session.state is not MeetingState.ENDED
            runtime.summary_ready = self.store.summary_path(session.meeting_id).exists()
            self._runtimes[session.meeting_id] = runtime
            self._by_hashtag[session.hashtag] = session.meeting_id

    # -- listeners ---------------------------------------------------------------

    def add_listener(self, listener: PushListener) -> None:
        self._listeners.append(listener)

    def remove_listener(self, listener: PushListener) -> None:
        if listener in self._listeners:
            self._listeners.remove(listener)

    def _publish(self, meeting_id: str, message: dict) -> None:
        for listener in list(self._listeners):
            try:
                listener(meeting_id, message)
            except Exception:  # a broken subscriber must never stall ingest
                logger.exception("push listener failed")

    # -- lookups -----------------------------------------------------------------

    def _runtime(self, meeting_id: str) -> MeetingRuntime:
        runtime = self._runtimes.get(meeting_id)
        if runtime is None:
            raise NotFoundError(f"unknown meeting {meeting_id}")
        return runtime

    def _runtime_by_hashtag(self, hashtag: str) -> MeetingRuntime:
        meeting_id = self._by_hashtag.get(hashtag.lower())
        if meeting_id is None:
            raise NotFoundError(f"unknown hashtag {hashtag}")
        return self._runtime(meeting_id)

    def meeting(self, meeting_id: str) -> MeetingSession:
        return self._runtime(meeting_id).session

    def meeting_ids(self) -> list[str]:
        return list(self._runtimes.keys())

    def resolve_attendee(self, token_value: str) -> SessionToken:
        token = self._tokens.get(token_value)
        if token is None:
            raise UnauthorizedError("unknown or expired session token")
        return token

    def resolve_host(self, token_value: str, meeting_id: str) -> None:
        bound = self._host_tokens.get(token_value)
        if bound == meeting_id:
            return
        token = self._tokens.get(token_value)
        if token is not None and token.meeting_id == meeting_id:
            raise ForbiddenError("host credential required")
        raise UnauthorizedError("unknown or expired session token")

    def resolve_any(self, token_value: str, meeting_id: str) -> None:
        if self._host_tokens.get(token_value) == meeting_id:
            return
        token = self._tokens.get(token_value)
        if token is None or token.meeting_id != meeting_id:
            raise UnauthorizedError("token is not valid for this meeting")

    # -- clock helpers --------------------------------------------------------

    def _now(self, now_ms: int | None) -> int:
        return self.clock() if now_ms is None else now_ms

    def _meeting_now(self, runtime: MeetingRuntime, now_ms: int | None) -> int:
        """Current position on the meeting clock (ms since start, frozen at end)."""
        session = runtime.session
        if session.started_at is None:
            return 0
        if session.ended_at is not None:
            return session.ended_at - session.started_at
        return max(0, self._now(now_ms) - session.started_at)

    # -- session lifecycle --------------------------------------------------------

    def create_meeting(
        self,
        host_id: str,
        title: str,
        recording_enabled: bool,
        now_ms: int | None = None,
    ) -> tuple[MeetingSession, SessionToken]:
        with self._registry_lock:
            session = new_meeting(
                host_id,
                title,
                recording_enabled,
                self._rand,
                taken_hashtags=self._by_hashtag.__contains__,
            )
            self.store.save_meeting(session)
            runtime = MeetingRuntime(session)
            self._runtimes[session.meeting_id] = runtime
            self._by_hashtag[session.hashtag] = session.meeting_id
            host_token = SessionToken(
                token=new_token_value(self._rand),
                meeting_id=session.meeting_id,
                attendee=host_principal(session.salt, host_id),
                issued_at=self._now(now_ms),
            )
            self._host_tokens[host_token.token] = session.meeting_id
        return session, host_token

    def join_meeting(self, hashtag: str, email: str, now_ms: int | None = None) -> SessionToken:
        address = validate_email(email)
        runtime = self._runtime_by_hashtag(hashtag)
        with runtime.lock:
            session = runtime.session
            if session.state is MeetingState.ENDED:
                raise GoneError("meeting has ended")
            attendee = derive_attendee_id(session.salt, address)
            join = runtime.record_join(attendee, self._meeting_now(runtime, now_ms))
            if join is not None:
                self.store.append_join(session.meeting_id, join)
            token = SessionToken(
                token=new_token_value(self._rand),
                meeting_id=session.meeting_id,
                attendee=attendee,
                issued_at=self._now(now_ms),
            )
            self._tokens[token.token] = token
        self.notifier.register(session.meeting_id, address)
        # No push here: version only moves with events, and the stream keeps
        # versions strictly increasing. New faces ride the next state message.
        return token

    def start_meeting(self, token_value: str, meeting_id: str, now_ms: int | None = None) -> MeetingSession:
        self.resolve_host(token_value, meeting_id)
        runtime = self._runtime(meeting_id)
        with runtime.lock:
            runtime.session = runtime.session.advanced_to(MeetingState.LIVE, self._now(now_ms))
            self.store.save_meeting(runtime.session)
            return runtime.session

    def end_meeting(
        self,
        token_value: str,
        meeting_id: str,
        now_ms: int | None = None,
        wait: bool = True,
    ) -> MeetingSession:
        """Advance to ended and run the snippet+summary pipeline.

        With wait=False the pipeline runs in a background thread (the server
        mode); the summary endpoint reports pending until it lands.
        """
        self.resolve_host(token_value, meeting_id)
        runtime = self._runtime(meeting_id)
        with runtime.lock:
            runtime.session = runtime.session.advanced_to(MeetingState.ENDED, self._now(now_ms))
            self.store.save_meeting(runtime.session)
            session = runtime.session
        self._publish(meeting_id, {"type": "ended"})
        if wait:
            self.finalize(meeting_id)
        else:
            threading.Thread(target=self._finalize_quietly, args=(meeting_id,), daemon=True).start()
        return session

    def _finalize_quietly(self, meeting_id: str) -> None:
        try:
            self.finalize(meeting_id)
        except Exception:
            logger.exception("summary pipeline failed for meeting %s", meeting_id)

    # -- event ingest ---------------------------------------------------------

    def _accept(self, runtime: MeetingRuntime, event: Event) -> Event:
        # Durable append happens before commit/ack; a failure leaves no trace.
        self.store.append(runtime.session.meeting_id, event)
        runtime.commit(event)
        return event

    def _ingest_context(self, token_value: str) -> tuple[MeetingRuntime, AttendeeId]:
        token = self.resolve_attendee(token_value)
        runtime = self._runtime(token.meeting_id)
        return runtime, token.attendee

    def submit_reaction(self, token_value: str, kind: ReactionKind, now_ms: int | None = None) -> Event:
        runtime, attendee = self._ingest_context(token_value)
        with runtime.lock:
            self._require_live(runtime)
            ts = runtime.stamp(self._meeting_now(runtime, now_ms))
            event = self._accept(runtime, runtime.build_reaction(attendee, kind, ts))
        self._publish(runtime.session.meeting_id, {"type": "state", "version": event.seq})
        return event

    def submit_comment(self, token_value: str, text: str, now_ms: int | None = None) -> Event:
        runtime, attendee = self._ingest_context(token_value)
        with runtime.lock:
            self._require_live(runtime)
            ts = runtime.stamp(self._meeting_now(runtime, now_ms))
            comment_id = new_comment_id(self._rand)
            event = self._accept(runtime, runtime.build_comment(attendee, comment_id, text, ts))
        self._publish(runtime.session.meeting_id, {"type": "state", "version": event.seq})
        return event

    def upvote_comment(self, token_value: str, comment_id: str, now_ms: int | None = None) -> tuple[Event, bool]:
        """Returns (event, created); repeats return the original event."""
        runtime, attendee = self._ingest_context(token_value)
        with runtime.lock:
            self._require_live(runtime)
            ts = runtime.stamp(self._meeting_now(runtime, now_ms))
            built = runtime.build_upvote(attendee, comment_id, ts)
            if built is None:
                return runtime.existing_upvote(attendee, comment_id), False
            event = self._accept(runtime, built)
        self._publish(runtime.session.meeting_id, {"type": "state", "version": event.seq})
        return event, True

    @staticmethod
    def _require_live(runtime: MeetingRuntime) -> None:
        if runtime.session.state is not MeetingState.LIVE:
            raise ConflictError(f"meeting is {runtime.session.state.value}, not live")

    # -- reads -------------------------------------------------------------------

    def list_comments(self, meeting_id: str, order: CommentOrder = CommentOrder.CHRONO) -> list[CommentEntry]:
        runtime = self._runtime(meeting_id)
        with runtime.lock:
            return runtime.comment_entries(order)

    def last_seq(self, meeting_id: str) -> int:
        return self._runtime(meeting_id).last_seq

    def cloud_state(self, meeting_id: str, at_ms: int | None = None, now_ms: int | None = None) -> CloudState:
        """Live state (at_ms omitted) or the batch fold at a past horizon."""
        runtime = self._runtime(meeting_id)
        with runtime.lock:
            if at_ms is None:
                horizon = max(self._meeting_now(runtime, now_ms), runtime.last_ts)
                return runtime.live_cloud(horizon)
            return batch_cloud_at(
                meeting_id,
                runtime.events,
                runtime.joins,
                at_ms,
                recording=runtime.recording_active,
            )

    def timeline_of(self, meeting_id: str, now_ms: int | None = None) -> list[TimelineBucket]:
        runtime = self._runtime(meeting_id)
        with runtime.lock:
            duration_s = max(self._meeting_now(runtime, now_ms), runtime.last_ts) / 1000
            if duration_s <= 0:
                return []
            return build_timeline(runtime.events, duration_s, self.config)

    # -- audio broker ---------------------------------------------------------

    def ingest_recording(
        self,
        token_value: str,
        meeting_id: str,
        data: bytes,
        offset_ms: int = 0,
    ) -> Path:
        self.resolve_host(token_value, meeting_id)
        runtime = self._runtime(meeting_id)
        with runtime.lock:
            if not runtime.session.recording_enabled:
                raise ForbiddenError("recording is disabled for this meeting")
            if runtime.session.state is MeetingState.ENDED:
                raise ConflictError("meeting has ended; recording uploads are closed")
            path = audio.store_recording(self.store, meeting_id, data, offset_ms)
            runtime.recording_offset_ms = offset_ms
            was_active = runtime.recording_active
            runtime.recording_active = True
        if not was_active:
            self._publish(meeting_id, {"type": "recording", "value": True})
        return path

    # -- summary pipeline -------------------------------------------------------

    def _pipeline_lock(self, meeting_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._pipeline_locks.setdefault(meeting_id, threading.Lock())

    def finalize(self, meeting_id: str, regenerate: bool = False) -> SummaryReport:
        """Extract snippets, build and persist the summary, notify once.

        Idempotent: a second call returns the stored result unless
        regenerate is set, in which case the pipeline reruns (snippet files
        are rewritten deterministically, nothing is duplicated).
        """
        runtime = self._runtime(meeting_id)
        if runtime.session.state is not MeetingState.ENDED:
            raise ConflictError("summary requires an ended meeting")
        with self._pipeline_lock(meeting_id):
            first_time = not runtime.summary_ready
            if runtime.summary_ready and not regenerate:
                return self.load_summary(meeting_id)
            if runtime.recording_active:
                runtime.recording_active = False
                self._publish(meeting_id, {"type": "recording", "value": False})
            warnings: list[str] = []
            extracted = []
            recording = audio.load_recording(self.store, meeting_id)
            snippet_dir = self.store.snippets_dir(meeting_id)
            if snippet_dir.exists():
                for stale in snippet_dir.glob("*.wav"):
                    stale.unlink()
            if runtime.session.recording_enabled and recording is not None:
                try:
                    extracted = snippets.extract_snippets(
                        runtime.events,
                        recording[0],
                        runtime.session,
                        self.config,
                        snippet_dir,
                        audio_offset_s=recording[1] / 1000,
                    )
                except AudioDecodeError as exc:
                    warnings.append(f"snippet extraction skipped: {exc}")
            report = summary.generate_summary(
                runtime.session,
                runtime.events,
                runtime.joins,
                extracted,
                self.config,
                warnings=warnings,
            )
            self.store.save_summary(meeting_id, summary.summary_bytes(report))
            runtime.summary_ready = True
            if first_time:
                link = f"{self.base_url}/summary/{meeting_id}"
                notify_attendees(self.notifier, meeting_id, runtime.session.title, link)
            return report

    def summary_status(self, meeting_id: str) -> str:
        """'none' before end, 'pending' after end until the report lands, 'ready'."""
        runtime = self._runtime(meeting_id)
        if runtime.summary_ready:
            return "ready"
        return "pending" if runtime.session.state is MeetingState.ENDED else "none"

    def load_summary(self, meeting_id: str) -> SummaryReport:
        self._runtime(meeting_id)
        raw = self.store.load_summary(meeting_id)
        if raw is None:
            raise NotFoundError(f"no summary for meeting {meeting_id}")
        return SummaryReport.from_dict(json.loads(raw.decode("utf-8")))

    def load_summary_bytes(self, meeting_id: str) -> bytes | None:
        self._runtime(meeting_id)
        return self.store.load_summary(meeting_id)

    def snippet_file(self, meeting_id: str, index: int) -> Path:
        report = self.load_summary(meeting_id)
        if not 0 <= index < len(report.snippets):
            raise NotFoundError(f"no snippet {index} for meeting {meeting_id}")
        return self.store.data_dir / report.snippets[index].path

    def close(self) -> None:
        self.store.close()
