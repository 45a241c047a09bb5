"""Summary assembly, HTML rendering, and notification delivery records."""

from __future__ import annotations

import json

import pytest

from meetcues.domain import (
    AudioSnippet,
    ConflictError,
    JoinRecord,
    MeetingState,
    SnippetConfig,
)
from meetcues.summary import (
    DeliveryRecord,
    FileOutboxNotifier,
    comment_entries_from_events,
    generate_summary,
    notify_attendees,
    render_html,
    summary_bytes,
)

from conftest import EventBuilder, attendee
from test_domain import make_session


def ended_session(duration_s: int = 300):
    return make_session().advanced_to(MeetingState.LIVE, 0).advanced_to(MeetingState.ENDED, duration_s * 1000)


def spec_trace_report():
    """The worked example: per-bucket reactions [2,0,10,9,0], one snippet."""
    builder = EventBuilder()
    for i, n in enumerate([2, 0, 10, 9, 0]):
        for k in range(n):
            builder.like(k % 3, (i * 60 + k) * 1000)
    joins = [JoinRecord(attendee=attendee(i), ts_ms=0) for i in range(3)]
    snippets = (
        AudioSnippet(meeting_id="m1", start_s=120, end_s=240, path="m1/snippets/0_120-240.wav", peak_norm=1.0),
    )
    return generate_summary(ended_session(), builder.events, joins, snippets, SnippetConfig())


class TestGenerateSummary:
    def test_spec_trace_norms_and_snippet(self):
        report = spec_trace_report()
        assert [b.norm for b in report.timeline] == [0.2, 0.0, 1.0, 0.9, 0.0]
        assert [(s.start_s, s.end_s) for s in report.snippets] == [(120, 240)]
        assert report.attendee_count == 3

    def test_requires_ended_meeting(self):
        live = make_session().advanced_to(MeetingState.LIVE, 0)
        with pytest.raises(ConflictError):
            generate_summary(live, [], [], [], SnippetConfig())

    def test_comment_orderings_from_log(self):
        builder = EventBuilder()
        c1 = builder.comment(0, 1000)
        c2 = builder.comment(1, 2000)
        builder.upvote(0, 3000, c2.payload.comment_id)
        builder.upvote(1, 3500, c2.payload.comment_id)
        builder.upvote(2, 4000, c1.payload.comment_id)
        joins = [JoinRecord(attendee=attendee(i), ts_ms=0) for i in range(3)]
        report = generate_summary(ended_session(), builder.events, joins, [], SnippetConfig())
        assert [c.upvotes for c in report.comments_chrono] == [1, 2]
        assert [c.comment_id for c in report.comments_popular] == [
            c2.payload.comment_id,
            c1.payload.comment_id,
        ]

    def test_upvote_tally_counts_distinct_attendees(self):
        builder = EventBuilder()
        comment = builder.comment(0, 1000)
        builder.upvote(1, 2000, comment.payload.comment_id)
        entries = comment_entries_from_events(builder.events)
        assert entries[0].upvotes == 1

    def test_determinism(self):
        assert summary_bytes(spec_trace_report()) == summary_bytes(spec_trace_report())

    def test_cloud_recording_false(self):
        assert spec_trace_report().cloud.recording is False


class TestRenderHtml:
    def test_contains_title(self):
        html = render_html(spec_trace_report())
        assert "Standup" in html

    def test_snippet_players_one_per_snippet(self):
        html = render_html(spec_trace_report())
        assert html.count("<audio") == 1

    def test_zero_snippet_page_has_no_audio(self):
        builder = EventBuilder()
        builder.like(0, 1000)
        report = generate_summary(ended_session(60), builder.events, [], [], SnippetConfig())
        html = render_html(report)
        assert "<audio" not in html

    def test_embeds_report_json(self):
        report = spec_trace_report()
        html = render_html(report)
        start = html.index('id="report-data">') + len('id="report-data">')
        end = html.index("</script>", start)
        embedded = json.loads(html[start:end].replace("<\\/", "</"))
        assert embedded["attendee_count"] == report.attendee_count

    def test_comment_text_is_escaped(self):
        builder = EventBuilder()
        builder.comment(0, 1000, text="<script>alert(1)</script>")
        report = generate_summary(ended_session(60), builder.events, [], [], SnippetConfig())
        html = render_html(report)
        # rendered markup escapes the text; the embedded JSON escapes "</"
        # so the data block cannot be terminated early
        assert "&lt;script&gt;" in html
        assert html.count("</script>") == 1  # only the data block's own closer


class TestNotify:
    def test_one_file_per_recipient(self, tmp_path):
        notifier = FileOutboxNotifier(lambda mid: tmp_path / mid / "outbox")
        for i in range(5):
            notifier.register("m1", f"u{i}@x.com")
        records = notify_attendees(notifier, "m1", "Standup", "http://host/summary/m1")
        assert len(records) == 5 and all(r.ok for r in records)
        assert len(list((tmp_path / "m1" / "outbox").glob("*.eml"))) == 5

    def test_register_dedupes(self, tmp_path):
        notifier = FileOutboxNotifier(lambda mid: tmp_path / "outbox")
        notifier.register("m1", "a@x.com")
        notifier.register("m1", "a@x.com")
        assert notifier.recipients("m1") == ["a@x.com"]

    def test_message_format(self, tmp_path):
        notifier = FileOutboxNotifier(lambda mid: tmp_path / "outbox")
        notifier.register("m1", "a@x.com")
        notify_attendees(notifier, "m1", "Standup", "http://host/summary/m1")
        text = (tmp_path / "outbox" / "001.eml").read_text()
        headers, _, body = text.partition("\n\n")
        assert "To: a@x.com" in headers
        assert "Subject: " in headers
        assert "http://host/summary/m1" in body

    def test_failure_isolated_per_recipient(self, tmp_path):
        class Boom(FileOutboxNotifier):
            def deliver(self, meeting_id, recipient, subject, body):
                if recipient == "bad@x.com":
                    raise OSError("disk full")
                super().deliver(meeting_id, recipient, subject, body)

        notifier = Boom(lambda mid: tmp_path / "outbox")
        for address in ("a@x.com", "bad@x.com", "c@x.com"):
            notifier.register("m1", address)
        records = notify_attendees(notifier, "m1", "T", "http://x")
        by_recipient = {r.recipient: r for r in records}
        assert by_recipient["bad@x.com"].ok is False
        assert by_recipient["bad@x.com"].error == "disk full"
        assert sum(r.ok for r in records) == 2

    def test_delivery_record_shape(self):
        record = DeliveryRecord(recipient="a@x.com", ok=True)
        assert record.error is None
