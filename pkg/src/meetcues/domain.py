"""Shared domain types, their invariants, and the canonical JSON schemas.

Every other module depends on this one; it depends on nothing else in the
package. All types are immutable values validated at construction time, so
instances can be shared freely between threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterable, Sequence


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class MeetCuesError(Exception):
    """Base for all typed errors raised by the platform."""

    code = "internal"


class DomainValidationError(MeetCuesError, ValueError):
    """A value violates a domain invariant or an operation precondition."""

    code = "validation"


class NotFoundError(MeetCuesError):
    code = "not_found"


class GoneError(MeetCuesError):
    """The meeting has ended and no longer accepts this operation."""

    code = "gone"


class ConflictError(MeetCuesError):
    """Illegal lifecycle transition or operation against a non-live meeting."""

    code = "conflict"


class ForbiddenError(MeetCuesError):
    code = "forbidden"


class UnauthorizedError(MeetCuesError):
    code = "unauthorized"


class CorruptionError(MeetCuesError):
    """Persistent state is internally inconsistent (caller bug or bad disk)."""

    code = "corruption"


class AudioDecodeError(MeetCuesError):
    """Recording bytes are not the PCM WAV format we accept."""

    code = "decode"


# ---------------------------------------------------------------------------
# Enums
# ---------------------------------------------------------------------------


class MeetingState(str, Enum):
    CREATED = "created"
    LIVE = "live"
    ENDED = "ended"


class ReactionKind(str, Enum):
    LIKE = "like"
    CLARIFY = "clarify"


class Expression(str, Enum):
    HAPPY = "happy"
    NEUTRAL = "neutral"
    THINKING = "thinking"


class CommentOrder(str, Enum):
    CHRONO = "chrono"
    POPULARITY = "popularity"


# Lifecycle edges accepted by MeetingSession.advanced_to().
_LEGAL_TRANSITIONS = {
    (MeetingState.CREATED, MeetingState.LIVE),
    (MeetingState.LIVE, MeetingState.ENDED),
}


# ---------------------------------------------------------------------------
# Mood formulas (invariants of EmojiState, shared with the mood engine)
# ---------------------------------------------------------------------------

# Expression flips away from neutral once |mood| exceeds this.
EXPRESSION_THRESHOLD = 0.15

# Color stops for the like/clarify balance gradient.
COLOR_CLARIFY = (244, 194, 13)  # yellow at mood -1
COLOR_NEUTRAL = (200, 200, 200)  # gray at mood 0
COLOR_LIKE = (0, 163, 155)  # teal at mood +1

SIZE_SCALE_MIN = 1.0
SIZE_SCALE_MAX = 2.5


def mood_score(likes: int, clarifies: int) -> float:
    """Like/clarify balance in [-1, +1]; zero counts map to exactly 0."""
    if likes < 0 or clarifies < 0:
        raise DomainValidationError("reaction counts must be non-negative")
    return (likes - clarifies) / max(1, likes + clarifies)


def size_scale_of(comment_count: int) -> float:
    """Emoji growth with comment volume, capped at SIZE_SCALE_MAX."""
    if comment_count < 0:
        raise DomainValidationError("comment count must be non-negative")
    return min(SIZE_SCALE_MAX, 1.0 + math.log2(1 + comment_count) / 2)


def expression_of(mood: float) -> Expression:
    if mood > EXPRESSION_THRESHOLD:
        return Expression.HAPPY
    if mood < -EXPRESSION_THRESHOLD:
        return Expression.THINKING
    return Expression.NEUTRAL


def _round_half_away(x: float) -> int:
    # Fixed rounding rule so golden color values are portable. Components
    # here are never negative, but keep the rule total anyway.
    if x >= 0:
        return math.floor(x + 0.5)
    return math.ceil(x - 0.5)


def color_of(mood: float) -> tuple[int, int, int]:
    """Piecewise-linear gradient yellow -> gray -> teal over mood [-1, +1]."""
    if not -1.0 <= mood <= 1.0:
        raise DomainValidationError(f"mood {mood} outside [-1, 1]")
    if mood >= 0:
        lo, hi, t = COLOR_NEUTRAL, COLOR_LIKE, mood
    else:
        lo, hi, t = COLOR_CLARIFY, COLOR_NEUTRAL, mood + 1.0
    return tuple(_round_half_away(a + t * (b - a)) for a, b in zip(lo, hi))  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# Identity
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class AttendeeId:
    """128-bit opaque anonymized token, carried as lowercase hex."""

    hex: str

    def __post_init__(self) -> None:
        value = self.hex
        if len(value) != 32 or value != value.lower() or any(c not in "0123456789abcdef" for c in value):
            raise DomainValidationError("attendee id must be 32 lowercase hex chars")

    @classmethod
    def from_bytes(cls, raw: bytes) -> "AttendeeId":
        if len(raw) != 16:
            raise DomainValidationError("attendee id must be 16 bytes")
        return cls(raw.hex())

    def __str__(self) -> str:
        return self.hex


# ---------------------------------------------------------------------------
# Meeting session
# ---------------------------------------------------------------------------

HASHTAG_ALPHABET = "abcdefghijkmnpqrstuvwxyz23456789"  # no 0, 1, l, o
HASHTAG_LENGTH = 6
TITLE_MAX_CHARS = 200
COMMENT_MAX_CHARS = 2000


@dataclass(frozen=True)
class MeetingSession:
    """One meeting's lifecycle record, join code, and anonymization salt."""

    meeting_id: str
    hashtag: str
    title: str
    host_id: str
    recording_enabled: bool
    salt: bytes
    state: MeetingState = MeetingState.CREATED
    started_at: int | None = None
    ended_at: int | None = None

    def __post_init__(self) -> None:
        if not self.meeting_id:
            raise DomainValidationError("meeting_id must be non-empty")
        if len(self.hashtag) != HASHTAG_LENGTH or any(c not in HASHTAG_ALPHABET for c in self.hashtag):
            raise DomainValidationError(f"hashtag must be {HASHTAG_LENGTH} chars from [{HASHTAG_ALPHABET}]")
        if not self.title or len(self.title) > TITLE_MAX_CHARS:
            raise DomainValidationError(f"title must be 1..{TITLE_MAX_CHARS} chars")
        if not self.host_id:
            raise DomainValidationError("host_id must be non-empty")
        if len(self.salt) != 16:
            raise DomainValidationError("salt must be 128 bits")
        past_start = self.state in (MeetingState.LIVE, MeetingState.ENDED)
        if (self.started_at is not None) != past_start:
            raise DomainValidationError("started_at must be set iff the meeting has started")
        if (self.ended_at is not None) != (self.state is MeetingState.ENDED):
            raise DomainValidationError("ended_at must be set iff the meeting has ended")
        if self.ended_at is not None and self.started_at is not None and self.ended_at < self.started_at:
            raise DomainValidationError("ended_at must be >= started_at")

    def advanced_to(self, state: MeetingState, at_epoch_ms: int) -> "MeetingSession":
        """Return the session moved along created -> live -> ended."""
        if (self.state, state) not in _LEGAL_TRANSITIONS:
            raise ConflictError(f"illegal transition {self.state.value} -> {state.value}")
        if state is MeetingState.LIVE:
            return replace(self, state=state, started_at=at_epoch_ms)
        return replace(self, state=state, ended_at=max(at_epoch_ms, self.started_at or 0))

    @property
    def duration_ms(self) -> int | None:
        if self.started_at is None or self.ended_at is None:
            return None
        return self.ended_at - self.started_at

    def to_dict(self, include_salt: bool = False) -> dict[str, Any]:
        d: dict[str, Any] = {
            "meeting_id": self.meeting_id,
            "hashtag": self.hashtag,
            "title": self.title,
            "host_id": self.host_id,
            "recording_enabled": self.recording_enabled,
            "state": self.state.value,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
        }
        if include_salt:
            # The salt is the anonymization key; it never leaves the server
            # except through the metadata file it is persisted in.
            d["salt"] = self.salt.hex()
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "MeetingSession":
        return cls(
            meeting_id=d["meeting_id"],
            hashtag=d["hashtag"],
            title=d["title"],
            host_id=d["host_id"],
            recording_enabled=bool(d["recording_enabled"]),
            salt=bytes.fromhex(d["salt"]),
            state=MeetingState(d["state"]),
            started_at=d.get("started_at"),
            ended_at=d.get("ended_at"),
        )


# ---------------------------------------------------------------------------
# Events
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReactionPayload:
    kind: ReactionKind

    type = "reaction"

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value}


@dataclass(frozen=True)
class CommentPayload:
    comment_id: str
    text: str

    type = "comment"

    def __post_init__(self) -> None:
        if not self.comment_id:
            raise DomainValidationError("comment_id must be non-empty")
        if not 1 <= len(self.text) <= COMMENT_MAX_CHARS:
            raise DomainValidationError(f"comment text must be 1..{COMMENT_MAX_CHARS} chars")

    def to_dict(self) -> dict[str, Any]:
        return {"comment_id": self.comment_id, "text": self.text}


@dataclass(frozen=True)
class UpvotePayload:
    comment_id: str

    type = "upvote"

    def __post_init__(self) -> None:
        if not self.comment_id:
            raise DomainValidationError("comment_id must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {"comment_id": self.comment_id}


EventPayload = ReactionPayload | CommentPayload | UpvotePayload


@dataclass(frozen=True)
class Event:
    """One accepted, anonymized interaction, sequenced per meeting."""

    seq: int
    ts_ms: int
    attendee: AttendeeId
    payload: EventPayload

    def __post_init__(self) -> None:
        if self.seq < 1:
            raise DomainValidationError("seq starts at 1")
        if self.ts_ms < 0:
            raise DomainValidationError("ts_ms must be non-negative")

    @property
    def type(self) -> str:
        return self.payload.type

    def to_dict(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "ts_ms": self.ts_ms,
            "attendee": self.attendee.hex,
            "type": self.type,
            "payload": self.payload.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Event":
        kind = d["type"]
        p = d["payload"]
        payload: EventPayload
        if kind == "reaction":
            payload = ReactionPayload(ReactionKind(p["kind"]))
        elif kind == "comment":
            payload = CommentPayload(p["comment_id"], p["text"])
        elif kind == "upvote":
            payload = UpvotePayload(p["comment_id"])
        else:
            raise DomainValidationError(f"unknown event type {kind!r}")
        return cls(seq=d["seq"], ts_ms=d["ts_ms"], attendee=AttendeeId(d["attendee"]), payload=payload)


@dataclass(frozen=True)
class JoinRecord:
    """An attendee's first appearance in a meeting, on the meeting clock."""

    attendee: AttendeeId
    ts_ms: int

    def __post_init__(self) -> None:
        if self.ts_ms < 0:
            raise DomainValidationError("join ts_ms must be non-negative")

    def to_dict(self) -> dict[str, Any]:
        return {"attendee": self.attendee.hex, "ts_ms": self.ts_ms}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "JoinRecord":
        return cls(attendee=AttendeeId(d["attendee"]), ts_ms=d["ts_ms"])


# ---------------------------------------------------------------------------
# Mood encodings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EmojiState:
    """Per-attendee face encoding; all derived fields must match the formulas."""

    attendee: AttendeeId
    like_count: int
    clarify_count: int
    comment_count: int
    mood: float
    color: tuple[int, int, int]
    size_scale: float
    expression: Expression

    def __post_init__(self) -> None:
        if min(self.like_count, self.clarify_count, self.comment_count) < 0:
            raise DomainValidationError("counts must be non-negative")
        if self.mood != mood_score(self.like_count, self.clarify_count):
            raise DomainValidationError("mood does not match its formula")
        if self.size_scale != size_scale_of(self.comment_count):
            raise DomainValidationError("size_scale does not match its formula")
        if self.expression is not expression_of(self.mood):
            raise DomainValidationError("expression does not match mood thresholds")
        if len(self.color) != 3 or any(not 0 <= c <= 255 for c in self.color):
            raise DomainValidationError("color must be an RGB triple")
        object.__setattr__(self, "color", tuple(self.color))

    @classmethod
    def from_counts(cls, attendee: AttendeeId, likes: int, clarifies: int, comments: int) -> "EmojiState":
        mood = mood_score(likes, clarifies)
        return cls(
            attendee=attendee,
            like_count=likes,
            clarify_count=clarifies,
            comment_count=comments,
            mood=mood,
            color=color_of(mood),
            size_scale=size_scale_of(comments),
            expression=expression_of(mood),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "attendee": self.attendee.hex,
            "like_count": self.like_count,
            "clarify_count": self.clarify_count,
            "comment_count": self.comment_count,
            "mood": float(self.mood),
            "color": list(self.color),
            "size_scale": float(self.size_scale),
            "expression": self.expression.value,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EmojiState":
        return cls(
            attendee=AttendeeId(d["attendee"]),
            like_count=d["like_count"],
            clarify_count=d["clarify_count"],
            comment_count=d["comment_count"],
            mood=float(d["mood"]),
            color=tuple(d["color"]),
            size_scale=float(d["size_scale"]),
            expression=Expression(d["expression"]),
        )


@dataclass(frozen=True)
class CloudState:
    """The whole room at one time horizon; emojis sorted by attendee id."""

    meeting_id: str
    version: int
    at_ms: int
    emojis: tuple[EmojiState, ...]
    recording: bool

    def __post_init__(self) -> None:
        if self.version < 0:
            raise DomainValidationError("version must be non-negative")
        if self.at_ms < 0:
            raise DomainValidationError("at_ms must be non-negative")
        ids = [e.attendee for e in self.emojis]
        if len(set(ids)) != len(ids):
            raise DomainValidationError("duplicate attendee in cloud")
        object.__setattr__(self, "emojis", tuple(sorted(self.emojis, key=lambda e: e.attendee)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "meeting_id": self.meeting_id,
            "version": self.version,
            "at_ms": self.at_ms,
            "emojis": [e.to_dict() for e in self.emojis],
            "recording": self.recording,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CloudState":
        return cls(
            meeting_id=d["meeting_id"],
            version=d["version"],
            at_ms=d["at_ms"],
            emojis=tuple(EmojiState.from_dict(e) for e in d["emojis"]),
            recording=bool(d["recording"]),
        )


# ---------------------------------------------------------------------------
# Timeline and snippets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimelineBucket:
    """Counts and engagement for one time slice (default 60 s)."""

    index: int
    start_s: int
    reactions: int
    comments: int
    upvotes: int
    raw: float
    norm: float

    def __post_init__(self) -> None:
        if self.index < 0 or self.start_s < 0:
            raise DomainValidationError("bucket index/start must be non-negative")
        if min(self.reactions, self.comments, self.upvotes) < 0:
            raise DomainValidationError("bucket counts must be non-negative")
        if self.raw < 0:
            raise DomainValidationError("raw engagement must be non-negative")
        if not 0.0 <= self.norm <= 1.0:
            raise DomainValidationError("norm must lie in [0, 1]")

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "start_s": self.start_s,
            "reactions": self.reactions,
            "comments": self.comments,
            "upvotes": self.upvotes,
            "raw": float(self.raw),
            "norm": float(self.norm),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TimelineBucket":
        return cls(
            index=d["index"],
            start_s=d["start_s"],
            reactions=d["reactions"],
            comments=d["comments"],
            upvotes=d["upvotes"],
            raw=float(d["raw"]),
            norm=float(d["norm"]),
        )


def _time_num(x: float) -> int | float:
    """Serialize whole-second time points as ints, fractional ones as floats."""
    return int(x) if float(x).is_integer() else float(x)


@dataclass(frozen=True)
class AudioSnippet:
    """One extracted high-engagement interval of the meeting recording."""

    meeting_id: str
    start_s: float
    end_s: float
    path: str
    peak_norm: float

    def __post_init__(self) -> None:
        if self.end_s <= self.start_s:
            raise DomainValidationError("snippet must have end_s > start_s")
        if self.start_s < 0:
            raise DomainValidationError("snippet start must be non-negative")
        if not 0.0 <= self.peak_norm <= 1.0:
            raise DomainValidationError("peak_norm must lie in [0, 1]")

    def to_dict(self) -> dict[str, Any]:
        return {
            "meeting_id": self.meeting_id,
            "start_s": _time_num(self.start_s),
            "end_s": _time_num(self.end_s),
            "path": self.path,
            "peak_norm": float(self.peak_norm),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "AudioSnippet":
        return cls(
            meeting_id=d["meeting_id"],
            start_s=float(d["start_s"]),
            end_s=float(d["end_s"]),
            path=d["path"],
            peak_norm=float(d["peak_norm"]),
        )


@dataclass(frozen=True)
class SnippetConfig:
    """Knobs for the engagement bucketing and snippet extraction pipeline."""

    bucket_s: int = 60
    threshold: float = 0.3
    weights: tuple[float, float, float] = (1.0, 1.0, 0.0)  # (reactions, comments, upvotes)
    pad_s: float = 0.0
    normalization: str = "max"  # "max" (default) or "total"

    def __post_init__(self) -> None:
        if self.bucket_s <= 0:
            raise DomainValidationError("bucket_s must be positive")
        if not 0.0 < self.threshold <= 1.0:
            raise DomainValidationError("threshold must lie in (0, 1]")
        if len(self.weights) != 3 or any(w < 0 for w in self.weights):
            raise DomainValidationError("weights must be three non-negative values")
        if not any(self.weights):
            raise DomainValidationError("weights must not all be zero")
        if self.pad_s < 0:
            raise DomainValidationError("pad_s must be non-negative")
        if self.normalization not in ("max", "total"):
            raise DomainValidationError("normalization must be 'max' or 'total'")
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    def to_dict(self) -> dict[str, Any]:
        return {
            "bucket_s": self.bucket_s,
            "threshold": float(self.threshold),
            "weights": [float(w) for w in self.weights],
            "pad_s": _time_num(self.pad_s),
            "normalization": self.normalization,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SnippetConfig":
        return cls(
            bucket_s=d.get("bucket_s", 60),
            threshold=float(d.get("threshold", 0.3)),
            weights=tuple(d.get("weights", (1.0, 1.0, 0.0))),
            pad_s=float(d.get("pad_s", 0.0)),
            normalization=d.get("normalization", "max"),
        )


# ---------------------------------------------------------------------------
# Comments and the summary report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CommentEntry:
    """A comment with its upvote tally, as listed live and in the summary."""

    comment_id: str
    seq: int
    ts_ms: int
    attendee: AttendeeId
    text: str
    upvotes: int

    def __post_init__(self) -> None:
        if self.upvotes < 0:
            raise DomainValidationError("upvotes must be non-negative")

    def to_dict(self) -> dict[str, Any]:
        return {
            "comment_id": self.comment_id,
            "seq": self.seq,
            "ts_ms": self.ts_ms,
            "attendee": self.attendee.hex,
            "text": self.text,
            "upvotes": self.upvotes,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CommentEntry":
        return cls(
            comment_id=d["comment_id"],
            seq=d["seq"],
            ts_ms=d["ts_ms"],
            attendee=AttendeeId(d["attendee"]),
            text=d["text"],
            upvotes=d["upvotes"],
        )


def sort_comments(entries: Iterable[CommentEntry], order: CommentOrder) -> list[CommentEntry]:
    """Deterministic total orders: chrono by seq, popularity by (votes desc, seq)."""
    if order is CommentOrder.CHRONO:
        return sorted(entries, key=lambda c: c.seq)
    return sorted(entries, key=lambda c: (-c.upvotes, c.seq))


@dataclass(frozen=True)
class SummaryReport:
    """The post-meeting bundle: final cloud, timeline, snippets, comments."""

    meeting: MeetingSession
    attendee_count: int
    cloud: CloudState
    timeline: tuple[TimelineBucket, ...]
    snippets: tuple[AudioSnippet, ...]
    comments_chrono: tuple[CommentEntry, ...]
    comments_popular: tuple[CommentEntry, ...]
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for name in ("timeline", "snippets", "comments_chrono", "comments_popular", "warnings"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.attendee_count < 0:
            raise DomainValidationError("attendee_count must be non-negative")
        chrono_ids = [c.comment_id for c in self.comments_chrono]
        popular_ids = [c.comment_id for c in self.comments_popular]
        if set(chrono_ids) != set(popular_ids) or len(chrono_ids) != len(popular_ids):
            raise DomainValidationError("comment orderings must contain the same comment set")
        if list(self.comments_chrono) != sort_comments(self.comments_chrono, CommentOrder.CHRONO):
            raise DomainValidationError("comments_chrono must be sorted by seq")
        if list(self.comments_popular) != sort_comments(self.comments_popular, CommentOrder.POPULARITY):
            raise DomainValidationError("comments_popular must be sorted by (upvotes desc, seq)")

    def to_dict(self) -> dict[str, Any]:
        return {
            "meeting": self.meeting.to_dict(),
            "attendee_count": self.attendee_count,
            "cloud": self.cloud.to_dict(),
            "timeline": [b.to_dict() for b in self.timeline],
            "snippets": [s.to_dict() for s in self.snippets],
            "comments_chrono": [c.to_dict() for c in self.comments_chrono],
            "comments_popular": [c.to_dict() for c in self.comments_popular],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SummaryReport":
        meeting = dict(d["meeting"])
        meeting.setdefault("salt", "00" * 16)  # wire copies omit the salt
        return cls(
            meeting=MeetingSession.from_dict(meeting),
            attendee_count=d["attendee_count"],
            cloud=CloudState.from_dict(d["cloud"]),
            timeline=tuple(TimelineBucket.from_dict(b) for b in d["timeline"]),
            snippets=tuple(AudioSnippet.from_dict(s) for s in d["snippets"]),
            comments_chrono=tuple(CommentEntry.from_dict(c) for c in d["comments_chrono"]),
            comments_popular=tuple(CommentEntry.from_dict(c) for c in d["comments_popular"]),
            warnings=tuple(d.get("warnings", ())),
        )


# ---------------------------------------------------------------------------
# Canonical JSON
# ---------------------------------------------------------------------------


def canonical_json(value: Any) -> str:
    """The one JSON encoding used on the wire, in logs, and in summary files.

    Compact separators, UTF-8 (no ASCII escaping), insertion-ordered keys as
    emitted by each type's to_dict, floats via shortest round-trip repr.
    """
    return json.dumps(value, ensure_ascii=False, allow_nan=False, separators=(",", ":"))


def canonical_json_bytes(value: Any) -> bytes:
    return canonical_json(value).encode("utf-8")
