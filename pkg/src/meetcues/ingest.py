"""Per-meeting runtime state: sequencing, comment/upvote indexes, live fold.

One MeetingRuntime exists per meeting; its lock is the meeting's single
serialization point. Acceptance of an event is atomic: the caller builds
the event under the lock, persists it, then commits it here. Rejected
submissions never reach the log, so replay needs no validation.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Sequence

from .domain import (
    AttendeeId,
    CloudState,
    CommentEntry,
    CommentOrder,
    CommentPayload,
    DomainValidationError,
    Event,
    JoinRecord,
    MeetingSession,
    NotFoundError,
    ReactionKind,
    ReactionPayload,
    UpvotePayload,
    sort_comments,
)
from .mood import Counts, cloud_from_counts


@dataclass
class CommentRecord:
    comment_id: str
    seq: int
    ts_ms: int
    attendee: AttendeeId
    text: str


class MeetingRuntime:
    """Mutable in-memory projection of one meeting's log."""

    def __init__(self, session: MeetingSession) -> None:
        self.session = session
        self.lock = threading.RLock()
        self.events: list[Event] = []
        self.joins: list[JoinRecord] = []
        self.joined: set[AttendeeId] = set()
        self.comments: dict[str, CommentRecord] = {}
        self.upvoters: dict[str, dict[AttendeeId, Event]] = {}
        self.counts: dict[AttendeeId, Counts] = {}
        self.last_seq = 0
        self.last_ts = 0
        self.recording_active = False
        self.recording_offset_ms = 0
        self.summary_ready = False

    @classmethod
    def from_log(
        cls,
        session: MeetingSession,
        events: Sequence[Event],
        joins: Sequence[JoinRecord],
    ) -> "MeetingRuntime":
        runtime = cls(session)
        for join in joins:
            runtime.joins.append(join)
            runtime.joined.add(join.attendee)
        for event in events:
            runtime.commit(event)
        return runtime

    # -- joins ---------------------------------------------------------------

    def record_join(self, attendee: AttendeeId, ts_ms: int) -> JoinRecord | None:
        """First join registers the attendee; repeats are no-ops (None)."""
        if attendee in self.joined:
            return None
        join = JoinRecord(attendee=attendee, ts_ms=ts_ms)
        self.joins.append(join)
        self.joined.add(attendee)
        return join

    # -- event construction & commit -----------------------------------------

    def stamp(self, now_meeting_ms: int) -> int:
        """Server timestamp on the meeting clock, monotonic in seq order."""
        return max(0, now_meeting_ms, self.last_ts)

    def build_reaction(self, attendee: AttendeeId, kind: ReactionKind, ts_ms: int) -> Event:
        return Event(seq=self.last_seq + 1, ts_ms=ts_ms, attendee=attendee, payload=ReactionPayload(kind))

    def build_comment(self, attendee: AttendeeId, comment_id: str, text: str, ts_ms: int) -> Event:
        if comment_id in self.comments:
            raise DomainValidationError(f"comment_id {comment_id} already used")
        payload = CommentPayload(comment_id=comment_id, text=text)
        return Event(seq=self.last_seq + 1, ts_ms=ts_ms, attendee=attendee, payload=payload)

    def build_upvote(self, attendee: AttendeeId, comment_id: str, ts_ms: int) -> Event | None:
        """None when this attendee already upvoted the comment (idempotent)."""
        if comment_id not in self.comments:
            raise NotFoundError(f"unknown comment {comment_id}")
        if attendee in self.upvoters.get(comment_id, {}):
            return None
        return Event(seq=self.last_seq + 1, ts_ms=ts_ms, attendee=attendee, payload=UpvotePayload(comment_id))

    def existing_upvote(self, attendee: AttendeeId, comment_id: str) -> Event:
        return self.upvoters[comment_id][attendee]

    def commit(self, event: Event) -> None:
        """Fold one accepted (already persisted) event into the projection."""
        if event.seq != self.last_seq + 1:
            raise DomainValidationError(f"commit out of order: {event.seq} after {self.last_seq}")
        payload = event.payload
        if isinstance(payload, CommentPayload):
            self.comments[payload.comment_id] = CommentRecord(
                comment_id=payload.comment_id,
                seq=event.seq,
                ts_ms=event.ts_ms,
                attendee=event.attendee,
                text=payload.text,
            )
        elif isinstance(payload, UpvotePayload):
            self.upvoters.setdefault(payload.comment_id, {})[event.attendee] = event
        self.counts.setdefault(event.attendee, Counts()).apply(event)
        self.events.append(event)
        self.last_seq = event.seq
        self.last_ts = max(self.last_ts, event.ts_ms)

    # -- reads -----------------------------------------------------------------

    def comment_entries(self, order: CommentOrder = CommentOrder.CHRONO) -> list[CommentEntry]:
        entries = [
            CommentEntry(
                comment_id=c.comment_id,
                seq=c.seq,
                ts_ms=c.ts_ms,
                attendee=c.attendee,
                text=c.text,
                upvotes=len(self.upvoters.get(c.comment_id, {})),
            )
            for c in self.comments.values()
        ]
        return sort_comments(entries, order)

    def live_cloud(self, at_ms: int) -> CloudState:
        """Current room state from the incremental fold (all events included)."""
        return cloud_from_counts(
            self.session.meeting_id,
            self.counts,
            self.joined,
            version=self.last_seq,
            at_ms=at_ms,
            recording=self.recording_active,
        )
