"""Post-meeting summary assembly, HTML rendering, and attendee notification.

The summary is a pure function of the event log, the join records, the
snippet extraction result, and the config: regenerating it always yields
byte-identical output.
"""

from __future__ import annotations

import html
import logging
from dataclasses import dataclass
from typing import Sequence

from .domain import (
    AudioSnippet,
    CommentEntry,
    CommentOrder,
    CommentPayload,
    ConflictError,
    Event,
    JoinRecord,
    MeetingSession,
    SnippetConfig,
    SummaryReport,
    UpvotePayload,
    canonical_json,
    sort_comments,
)
from .mood import cloud_at, timeline

logger = logging.getLogger(__name__)


def comment_entries_from_events(events: Sequence[Event]) -> list[CommentEntry]:
    """Rebuild comment tallies straight from the log (one vote per attendee)."""
    records: dict[str, CommentEntry] = {}
    voters: dict[str, set] = {}
    for event in events:
        payload = event.payload
        if isinstance(payload, CommentPayload):
            records[payload.comment_id] = CommentEntry(
                comment_id=payload.comment_id,
                seq=event.seq,
                ts_ms=event.ts_ms,
                attendee=event.attendee,
                text=payload.text,
                upvotes=0,
            )
            voters[payload.comment_id] = set()
        elif isinstance(payload, UpvotePayload):
            voters.setdefault(payload.comment_id, set()).add(event.attendee)
    return [
        CommentEntry(
            comment_id=c.comment_id,
            seq=c.seq,
            ts_ms=c.ts_ms,
            attendee=c.attendee,
            text=c.text,
            upvotes=len(voters.get(c.comment_id, ())),
        )
        for c in records.values()
    ]


def generate_summary(
    session: MeetingSession,
    events: Sequence[Event],
    joins: Sequence[JoinRecord],
    snippets: Sequence[AudioSnippet],
    config: SnippetConfig,
    warnings: Sequence[str] = (),
) -> SummaryReport:
    """Assemble the full report for an ended meeting."""
    duration_ms = session.duration_ms
    if duration_ms is None:
        raise ConflictError("summary requires an ended meeting")
    duration_s = duration_ms / 1000
    buckets = timeline(events, duration_s, config) if duration_s > 0 else []
    cloud = cloud_at(session.meeting_id, events, joins, duration_ms, recording=False)
    comments = comment_entries_from_events(events)
    return SummaryReport(
        meeting=session,
        attendee_count=len(joins),
        cloud=cloud,
        timeline=tuple(buckets),
        snippets=tuple(snippets),
        comments_chrono=tuple(sort_comments(comments, CommentOrder.CHRONO)),
        comments_popular=tuple(sort_comments(comments, CommentOrder.POPULARITY)),
        warnings=tuple(warnings),
    )


def summary_bytes(report: SummaryReport) -> bytes:
    return canonical_json(report.to_dict()).encode("utf-8")


# ---------------------------------------------------------------------------
# HTML view
# ---------------------------------------------------------------------------


def render_html(report: SummaryReport) -> str:
    """Self-contained summary page: no client code required to read it."""
    meeting = report.meeting
    esc = html.escape
    rows = []
    for b in report.timeline:
        minute = b.start_s // 60
        rows.append(
            f"<tr><td>{minute}</td><td>{b.reactions}</td><td>{b.comments}</td>"
            f"<td>{b.raw:g}</td><td>{b.norm:.3f}</td></tr>"
        )
    emoji_spans = [
        (
            f'<span class="emoji {e.expression.value}" title="{e.like_count}&#9650; {e.clarify_count}?" '
            f'style="background: rgb({e.color[0]},{e.color[1]},{e.color[2]}); '
            f"transform: scale({e.size_scale:.2f})\"></span>"
        )
        for e in report.cloud.emojis
    ]
    snippet_items = [
        (
            f"<li>{esc(_span_label(s))} "
            f'<audio controls src="/api/meetings/{esc(meeting.meeting_id)}/snippets/{i}"></audio></li>'
        )
        for i, s in enumerate(report.snippets)
    ]
    comment_items = [
        f"<li><b>{c.upvotes}&#9650;</b> {esc(c.text)}</li>" for c in report.comments_popular
    ]
    warning_items = [f"<li>{esc(w)}</li>" for w in report.warnings]
    parts = [
        "<!doctype html>",
        '<html><head><meta charset="utf-8">',
        f"<title>{esc(meeting.title)} &mdash; meeting summary</title>",
        "<style>",
        ".emoji{display:inline-block;width:28px;height:28px;border-radius:50%;margin:4px;}",
        "table{border-collapse:collapse} td,th{border:1px solid #ccc;padding:2px 8px;}",
        "</style></head><body>",
        f"<h1>{esc(meeting.title)}</h1>",
        f"<p>{report.attendee_count} attendees &middot; hashtag #{esc(meeting.hashtag)}</p>",
        "<h2>Room mood</h2>",
        f"<div>{''.join(emoji_spans)}</div>",
        "<h2>Engagement per minute</h2>",
        "<table><tr><th>minute</th><th>reactions</th><th>comments</th><th>raw</th><th>norm</th></tr>",
        "".join(rows),
        "</table>",
    ]
    if report.snippets:
        parts += ["<h2>Memorable moments</h2>", "<ul>", "".join(snippet_items), "</ul>"]
    if comment_items:
        parts += ["<h2>Comments by popularity</h2>", "<ol>", "".join(comment_items), "</ol>"]
    if warning_items:
        parts += ["<h2>Warnings</h2>", "<ul>", "".join(warning_items), "</ul>"]
    parts += [
        '<script type="application/json" id="report-data">',
        canonical_json(report.to_dict()).replace("</", "<\\/"),
        "</script>",
        "</body></html>",
    ]
    return "".join(parts)


def _span_label(snippet: AudioSnippet) -> str:
    return f"{_mmss(snippet.start_s)}-{_mmss(snippet.end_s)}"


def _mmss(seconds: float) -> str:
    total = int(seconds)
    return f"{total // 60:02d}:{total % 60:02d}"


# ---------------------------------------------------------------------------
# Notification
# ---------------------------------------------------------------------------


@dataclass
class DeliveryRecord:
    recipient: str
    ok: bool
    error: str | None = None


class Notifier:
    """Holds recipient addresses (separate from event data) and delivers.

    Addresses never mix with the anonymized event store; they live only in
    the notifier subsystem.
    """

    def register(self, meeting_id: str, address: str) -> None:  # pragma: no cover - trivial default
        pass

    def recipients(self, meeting_id: str) -> list[str]:
        return []

    def deliver(self, meeting_id: str, recipient: str, subject: str, body: str) -> None:
        raise NotImplementedError


class NullNotifier(Notifier):
    """Keeps no addresses and sends nothing."""


class FileOutboxNotifier(Notifier):
    """Writes one RFC-5322-style message file per recipient into an outbox dir."""

    def __init__(self, outbox_dir_for) -> None:
        self._outbox_dir_for = outbox_dir_for
        self._addresses: dict[str, list[str]] = {}

    def register(self, meeting_id: str, address: str) -> None:
        book = self._addresses.setdefault(meeting_id, [])
        if address not in book:
            book.append(address)

    def recipients(self, meeting_id: str) -> list[str]:
        return sorted(self._addresses.get(meeting_id, []))

    def deliver(self, meeting_id: str, recipient: str, subject: str, body: str) -> None:
        outbox = self._outbox_dir_for(meeting_id)
        outbox.mkdir(parents=True, exist_ok=True)
        index = len(list(outbox.glob("*.eml"))) + 1
        message = f"To: {recipient}\nSubject: {subject}\n\n{body}\n"
        (outbox / f"{index:03d}.eml").write_text(message, encoding="utf-8")


def notify_attendees(
    notifier: Notifier,
    meeting_id: str,
    title: str,
    link: str,
) -> list[DeliveryRecord]:
    """Deliver the summary link to every known recipient; failures are isolated."""
    subject = f"Meeting summary ready: {title}"
    body = f"The summary page for \"{title}\" is ready:\n\n  {link}\n"
    records: list[DeliveryRecord] = []
    for recipient in notifier.recipients(meeting_id):
        try:
            notifier.deliver(meeting_id, recipient, subject, body)
            records.append(DeliveryRecord(recipient=recipient, ok=True))
        except Exception as exc:
            logger.warning("summary notification failed for meeting %s: %s", meeting_id, exc)
            records.append(DeliveryRecord(recipient=recipient, ok=False, error=str(exc)))
    return records
