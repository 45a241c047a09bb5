"""Pure mood and engagement computation.

Everything here is a deterministic function over immutable inputs: the
per-attendee emoji encoding, the room cloud at any time horizon, and the
per-slice engagement timeline. The service layer keeps an incremental copy
of the cloud fold; `fold_counts`/`cloud_from_counts` are the shared kernel
that guarantees the incremental and batch paths cannot diverge.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from .domain import (
    AttendeeId,
    CloudState,
    CommentPayload,
    DomainValidationError,
    EmojiState,
    Event,
    JoinRecord,
    ReactionKind,
    ReactionPayload,
    SnippetConfig,
    TimelineBucket,
    UpvotePayload,
    color_of,
    expression_of,
    mood_score,
    size_scale_of,
)

__all__ = [
    "mood_score",
    "color_of",
    "expression_of",
    "size_scale_of",
    "emoji_state",
    "Counts",
    "fold_counts",
    "cloud_from_counts",
    "cloud_at",
    "timeline",
]


def emoji_state(attendee: AttendeeId, likes: int, clarifies: int, comments: int) -> EmojiState:
    """Full face encoding for one attendee's cumulative counts."""
    return EmojiState.from_counts(attendee, likes, clarifies, comments)


class Counts:
    """Mutable per-attendee (likes, clarifies, comments) accumulator."""

    __slots__ = ("likes", "clarifies", "comments")

    def __init__(self, likes: int = 0, clarifies: int = 0, comments: int = 0) -> None:
        self.likes = likes
        self.clarifies = clarifies
        self.comments = comments

    def apply(self, event: Event) -> None:
        payload = event.payload
        if isinstance(payload, ReactionPayload):
            if payload.kind is ReactionKind.LIKE:
                self.likes += 1
            else:
                self.clarifies += 1
        elif isinstance(payload, CommentPayload):
            self.comments += 1
        # Upvotes do not move the emoji encoding.

    def copy(self) -> "Counts":
        return Counts(self.likes, self.clarifies, self.comments)


def fold_counts(
    events: Sequence[Event],
    at_ms: int,
    base: dict[AttendeeId, Counts] | None = None,
    from_seq: int = 0,
) -> tuple[dict[AttendeeId, Counts], int]:
    """Accumulate per-attendee counts for events with seq > from_seq and ts <= at_ms.

    Returns the counts map and the seq of the last folded event (version).
    Events must be in seq order; ts_ms is non-decreasing, so the scan stops
    at the first event past the horizon.
    """
    counts: dict[AttendeeId, Counts] = {} if base is None else base
    version = from_seq
    for event in events:
        if event.seq <= from_seq:
            continue
        if event.ts_ms > at_ms:
            break
        counts.setdefault(event.attendee, Counts()).apply(event)
        version = event.seq
    return counts, version


def cloud_from_counts(
    meeting_id: str,
    counts: dict[AttendeeId, Counts],
    joined: Iterable[AttendeeId],
    version: int,
    at_ms: int,
    recording: bool,
) -> CloudState:
    """Assemble a CloudState: one emoji per joined attendee, zero-activity included."""
    emojis = []
    for attendee in joined:
        c = counts.get(attendee) or Counts()
        emojis.append(emoji_state(attendee, c.likes, c.clarifies, c.comments))
    return CloudState(
        meeting_id=meeting_id,
        version=version,
        at_ms=at_ms,
        emojis=tuple(emojis),
        recording=recording,
    )


def cloud_at(
    meeting_id: str,
    events: Sequence[Event],
    joins: Sequence[JoinRecord],
    at_ms: int,
    recording: bool = False,
) -> CloudState:
    """Batch fold of the whole log up to at_ms (the time-scrub semantics)."""
    counts, version = fold_counts(events, at_ms)
    joined = {j.attendee for j in joins if j.ts_ms <= at_ms}
    return cloud_from_counts(meeting_id, counts, joined, version, at_ms, recording)


def timeline(
    events: Sequence[Event],
    duration_s: float,
    config: SnippetConfig | None = None,
) -> list[TimelineBucket]:
    """Per-slice counts and engagement over ceil(duration / bucket) buckets.

    Windows are half-open [start, start + bucket); an event stamped exactly
    at the meeting end lands in the final bucket.
    """
    if duration_s <= 0:
        raise DomainValidationError("duration_s must be positive")
    cfg = config or SnippetConfig()
    n = math.ceil(duration_s / cfg.bucket_s)
    reactions = [0] * n
    comments = [0] * n
    upvotes = [0] * n
    for event in events:
        index = min(int(event.ts_ms // (cfg.bucket_s * 1000)), n - 1)
        if isinstance(event.payload, ReactionPayload):
            reactions[index] += 1
        elif isinstance(event.payload, CommentPayload):
            comments[index] += 1
        else:
            upvotes[index] += 1
    w_r, w_c, w_u = cfg.weights
    raws = [w_r * reactions[i] + w_c * comments[i] + w_u * upvotes[i] for i in range(n)]
    denom = max(raws) if cfg.normalization == "max" else sum(raws)
    return [
        TimelineBucket(
            index=i,
            start_s=i * cfg.bucket_s,
            reactions=reactions[i],
            comments=comments[i],
            upvotes=upvotes[i],
            raw=raws[i],
            norm=(raws[i] / denom) if denom > 0 else 0.0,
        )
        for i in range(n)
    ]
