"""Application service: lifecycle, ingest, state, pipeline, recovery."""

from __future__ import annotations

import json
import random
import threading
from pathlib import Path

import pytest

from meetcues.domain import (
    AudioSnippet,
    CommentOrder,
    ConflictError,
    DomainValidationError,
    ForbiddenError,
    GoneError,
    MeetingState,
    NotFoundError,
    ReactionKind,
    UnauthorizedError,
    canonical_json,
)
from meetcues.mood import cloud_at
from meetcues.service import MeetCuesService
from meetcues.sessions import seeded_rand
from meetcues.summary import FileOutboxNotifier, NullNotifier

from test_snippets import make_tone

T0 = 1_000_000_000  # epoch ms used as the meeting-start wall clock


def make_service(tmp_path: Path, seed: int = 1234, **kwargs) -> MeetCuesService:
    kwargs.setdefault("rand", seeded_rand(seed))
    kwargs.setdefault("fsync", False)
    return MeetCuesService(tmp_path / "data", **kwargs)


def live_meeting(service: MeetCuesService, recording: bool = False, title: str = "Standup"):
    session, host = service.create_meeting("h1", title, recording, now_ms=T0)
    session = service.start_meeting(host.token, session.meeting_id, now_ms=T0)
    return session, host


class TestCreateAndJoin:
    def test_create_sets_created_state(self, tmp_path):
        service = make_service(tmp_path)
        session, host = service.create_meeting("h1", "Standup", True, now_ms=T0)
        assert session.state is MeetingState.CREATED
        assert session.recording_enabled is True
        assert host.meeting_id == session.meeting_id

    def test_two_creates_distinct_hashtags(self, tmp_path):
        service = make_service(tmp_path)
        first, _ = service.create_meeting("h1", "A", False, now_ms=T0)
        second, _ = service.create_meeting("h1", "B", False, now_ms=T0)
        assert first.hashtag != second.hashtag

    def test_create_rejects_empty_title(self, tmp_path):
        with pytest.raises(DomainValidationError):
            make_service(tmp_path).create_meeting("h1", "", True, now_ms=T0)

    def test_join_twice_same_attendee_new_token(self, tmp_path):
        service = make_service(tmp_path)
        session, _ = live_meeting(service)
        t1 = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        t2 = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        assert t1.attendee == t2.attendee
        assert t1.token != t2.token

    def test_same_email_two_meetings_unrelated_ids(self, tmp_path):
        service = make_service(tmp_path)
        first, _ = live_meeting(service)
        second, host2 = service.create_meeting("h2", "Other", False, now_ms=T0)
        service.start_meeting(host2.token, second.meeting_id, now_ms=T0)
        ta = service.join_meeting(first.hashtag, "a@x.com", now_ms=T0)
        tb = service.join_meeting(second.hashtag, "a@x.com", now_ms=T0)
        assert ta.attendee != tb.attendee

    def test_join_unknown_hashtag(self, tmp_path):
        with pytest.raises(NotFoundError):
            make_service(tmp_path).join_meeting("zzzzzz", "a@x.com", now_ms=T0)

    def test_join_ended_meeting_gone(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service)
        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + 1000)
        with pytest.raises(GoneError):
            service.join_meeting(session.hashtag, "late@x.com", now_ms=T0 + 2000)

    def test_join_malformed_email(self, tmp_path):
        service = make_service(tmp_path)
        session, _ = live_meeting(service)
        with pytest.raises(DomainValidationError):
            service.join_meeting(session.hashtag, "not-an-email", now_ms=T0)

    def test_attendee_counted_once_in_cloud(self, tmp_path):
        service = make_service(tmp_path)
        session, _ = live_meeting(service)
        service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        service.join_meeting(session.hashtag, "a@x.com", now_ms=T0 + 500)
        cloud = service.cloud_state(session.meeting_id, now_ms=T0 + 1000)
        assert len(cloud.emojis) == 1


class TestLifecycle:
    def test_non_host_cannot_start(self, tmp_path):
        service = make_service(tmp_path)
        session, _ = service.create_meeting("h1", "A", False, now_ms=T0)
        attendee_token = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        with pytest.raises(ForbiddenError):
            service.start_meeting(attendee_token.token, session.meeting_id, now_ms=T0)

    def test_unknown_token_unauthorized(self, tmp_path):
        service = make_service(tmp_path)
        session, _ = service.create_meeting("h1", "A", False, now_ms=T0)
        with pytest.raises(UnauthorizedError):
            service.start_meeting("feedbeef", session.meeting_id, now_ms=T0)

    def test_end_on_created_conflicts(self, tmp_path):
        service = make_service(tmp_path)
        session, host = service.create_meeting("h1", "A", False, now_ms=T0)
        with pytest.raises(ConflictError):
            service.end_meeting(host.token, session.meeting_id, now_ms=T0)

    def test_end_enqueues_summary(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service)
        assert service.summary_status(session.meeting_id) == "none"
        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + 60_000)
        assert service.summary_status(session.meeting_id) == "ready"
        assert service.store.summary_path(session.meeting_id).exists()

    def test_state_history_is_prefix_of_lifecycle(self, tmp_path):
        # random call sequences can only walk created -> live -> ended
        legal_history = ["created", "live", "ended"]
        rng = random.Random(8)
        for case in range(40):
            service = make_service(tmp_path, seed=case)
            session, host = service.create_meeting("h1", "Walk", False, now_ms=T0)
            observed = [service.meeting(session.meeting_id).state.value]
            for step in range(6):
                op = rng.choice(["start", "end"])
                try:
                    if op == "start":
                        service.start_meeting(host.token, session.meeting_id, now_ms=T0 + step)
                    else:
                        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + step)
                except ConflictError:
                    pass
                state = service.meeting(session.meeting_id).state.value
                if state != observed[-1]:
                    observed.append(state)
            assert observed == legal_history[: len(observed)]


class TestIngest:
    def test_first_event_gets_seq_1(self, tmp_path):
        service = make_service(tmp_path)
        session, _ = live_meeting(service)
        token = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        event = service.submit_reaction(token.token, ReactionKind.LIKE, now_ms=T0 + 3000)
        assert event.seq == 1
        assert event.ts_ms == 3000
        assert event.payload.kind is ReactionKind.LIKE

    def test_submit_after_end_conflicts(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service)
        token = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + 1000)
        with pytest.raises(ConflictError):
            service.submit_reaction(token.token, ReactionKind.LIKE, now_ms=T0 + 2000)

    def test_submit_before_start_conflicts(self, tmp_path):
        service = make_service(tmp_path)
        session, _ = service.create_meeting("h1", "A", False, now_ms=T0)
        token = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        with pytest.raises(ConflictError):
            service.submit_reaction(token.token, ReactionKind.LIKE, now_ms=T0)

    def test_bad_token_unauthorized(self, tmp_path):
        service = make_service(tmp_path)
        live_meeting(service)
        with pytest.raises(UnauthorizedError):
            service.submit_reaction("nope", ReactionKind.LIKE, now_ms=T0)

    def test_host_token_cannot_submit_events(self, tmp_path):
        service = make_service(tmp_path)
        _, host = live_meeting(service)
        with pytest.raises(UnauthorizedError):
            service.submit_reaction(host.token, ReactionKind.LIKE, now_ms=T0)

    def test_comment_gets_fresh_ids(self, tmp_path):
        service = make_service(tmp_path)
        session, _ = live_meeting(service)
        token = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        first = service.submit_comment(token.token, "Why Q3?", now_ms=T0 + 1000)
        second = service.submit_comment(token.token, "And Q4?", now_ms=T0 + 2000)
        assert first.payload.comment_id != second.payload.comment_id
        entries = service.list_comments(session.meeting_id)
        assert [c.upvotes for c in entries] == [0, 0]

    def test_comment_text_bounds(self, tmp_path):
        service = make_service(tmp_path)
        session, _ = live_meeting(service)
        token = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        with pytest.raises(DomainValidationError):
            service.submit_comment(token.token, "x" * 2001, now_ms=T0)
        with pytest.raises(DomainValidationError):
            service.submit_comment(token.token, "", now_ms=T0)

    def test_upvote_idempotent_per_attendee(self, tmp_path):
        service = make_service(tmp_path)
        session, _ = live_meeting(service)
        alice = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        bob = service.join_meeting(session.hashtag, "b@x.com", now_ms=T0)
        comment = service.submit_comment(alice.token, "hm", now_ms=T0 + 1000)
        cid = comment.payload.comment_id
        e1, created1 = service.upvote_comment(alice.token, cid, now_ms=T0 + 2000)
        e2, created2 = service.upvote_comment(alice.token, cid, now_ms=T0 + 3000)
        e3, created3 = service.upvote_comment(alice.token, cid, now_ms=T0 + 4000)
        assert created1 and not created2 and not created3
        assert e1 == e2 == e3
        service.upvote_comment(bob.token, cid, now_ms=T0 + 5000)
        (entry,) = service.list_comments(session.meeting_id)
        assert entry.upvotes == 2
        # exactly two upvote events in the log
        events = service.store.replay(session.meeting_id)
        assert sum(1 for e in events if e.type == "upvote") == 2

    def test_upvote_unknown_comment(self, tmp_path):
        service = make_service(tmp_path)
        session, _ = live_meeting(service)
        token = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        with pytest.raises(NotFoundError):
            service.upvote_comment(token.token, "missing", now_ms=T0)

    def test_list_comments_orders(self, tmp_path):
        service = make_service(tmp_path)
        session, _ = live_meeting(service)
        tokens = [service.join_meeting(session.hashtag, f"u{i}@x.com", now_ms=T0) for i in range(6)]
        c1 = service.submit_comment(tokens[0].token, "first", now_ms=T0 + 1000)
        c2 = service.submit_comment(tokens[1].token, "second", now_ms=T0 + 2000)
        c3 = service.submit_comment(tokens[2].token, "third", now_ms=T0 + 3000)
        for t in tokens[:2]:
            service.upvote_comment(t.token, c1.payload.comment_id, now_ms=T0 + 4000)
        for t in tokens[:5]:
            service.upvote_comment(t.token, c2.payload.comment_id, now_ms=T0 + 5000)
        for t in tokens[2:4]:
            service.upvote_comment(t.token, c3.payload.comment_id, now_ms=T0 + 6000)
        chrono = service.list_comments(session.meeting_id, CommentOrder.CHRONO)
        popular = service.list_comments(session.meeting_id, CommentOrder.POPULARITY)
        assert [c.text for c in chrono] == ["first", "second", "third"]
        # c1 and c3 tie at 2 votes; earlier seq wins
        assert [c.text for c in popular] == ["second", "first", "third"]

    def test_sequence_contiguity_under_threads(self, tmp_path):
        service = make_service(tmp_path)
        session, _ = live_meeting(service)
        tokens = [service.join_meeting(session.hashtag, f"u{i}@x.com", now_ms=T0) for i in range(8)]
        errors: list[Exception] = []

        def hammer(token):
            try:
                for k in range(25):
                    service.submit_reaction(token.token, ReactionKind.LIKE, now_ms=T0 + k)
            except Exception as exc:  # pragma: no cover - diagnostic
                errors.append(exc)

        threads = [threading.Thread(target=hammer, args=(t,)) for t in tokens]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        events = service.store.replay(session.meeting_id)
        assert [e.seq for e in events] == list(range(1, 201))


class TestCloudState:
    def test_live_equals_batch_fold(self, tmp_path):
        service = make_service(tmp_path)
        session, _ = live_meeting(service)
        rng = random.Random(77)
        tokens = [service.join_meeting(session.hashtag, f"u{i}@x.com", now_ms=T0) for i in range(5)]
        for k in range(60):
            token = rng.choice(tokens)
            kind = rng.choice([ReactionKind.LIKE, ReactionKind.CLARIFY])
            service.submit_reaction(token.token, kind, now_ms=T0 + k * 500)
        runtime = service._runtime(session.meeting_id)
        live = service.cloud_state(session.meeting_id, now_ms=T0 + 60 * 500)
        batch = cloud_at(
            session.meeting_id, runtime.events, runtime.joins, live.at_ms, recording=False
        )
        assert live == batch

    def test_at_zero_is_version_zero(self, tmp_path):
        service = make_service(tmp_path)
        session, _ = live_meeting(service)
        service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        cloud = service.cloud_state(session.meeting_id, at_ms=0, now_ms=T0 + 5000)
        assert cloud.version == 0
        assert len(cloud.emojis) == 1

    def test_default_state_has_last_seq_version(self, tmp_path):
        service = make_service(tmp_path)
        session, _ = live_meeting(service)
        token = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        for k in range(4):
            service.submit_reaction(token.token, ReactionKind.LIKE, now_ms=T0 + 1000 * (k + 1))
        cloud = service.cloud_state(session.meeting_id, now_ms=T0 + 60_000)
        assert cloud.version == 4

    def test_unknown_meeting(self, tmp_path):
        with pytest.raises(NotFoundError):
            make_service(tmp_path).cloud_state("missing")


class TestSummaryPipeline:
    def test_no_activity_summary(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service)
        service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + 120_000)
        report = service.load_summary(session.meeting_id)
        assert report.attendee_count == 1
        assert report.snippets == ()
        assert report.comments_chrono == ()
        assert all(b.raw == 0 for b in report.timeline)
        assert len(report.timeline) == 2
        assert all(e.mood == 0 for e in report.cloud.emojis)

    def test_summary_cloud_equals_live_state_at_end(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service)
        token = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        service.submit_reaction(token.token, ReactionKind.LIKE, now_ms=T0 + 5000)
        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + 90_000)
        report = service.load_summary(session.meeting_id)
        live = service.cloud_state(session.meeting_id, now_ms=T0 + 300_000)
        assert report.cloud == live

    def test_regenerate_is_byte_identical(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service, recording=True)
        token = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        service.ingest_recording(host.token, session.meeting_id, make_tone(300))
        for k in range(30):
            service.submit_reaction(token.token, ReactionKind.LIKE, now_ms=T0 + 120_000 + k * 1000)
        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + 300_000)
        first = service.store.load_summary(session.meeting_id)
        service.finalize(session.meeting_id, regenerate=True)
        second = service.store.load_summary(session.meeting_id)
        assert first == second

    def test_summary_includes_snippets_from_burst(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service, recording=True)
        token = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        service.ingest_recording(host.token, session.meeting_id, make_tone(300))
        # burst in minutes 2-3 only
        for k in range(60):
            service.submit_reaction(token.token, ReactionKind.LIKE, now_ms=T0 + 120_000 + k * 1900)
        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + 300_000)
        report = service.load_summary(session.meeting_id)
        assert [(s.start_s, s.end_s) for s in report.snippets] == [(120, 240)]
        snippet_path = service.snippet_file(session.meeting_id, 0)
        assert snippet_path.exists()
        with pytest.raises(NotFoundError):
            service.snippet_file(session.meeting_id, 1)

    def test_corrupt_recording_degrades_to_warning(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service, recording=True)
        token = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        service.ingest_recording(host.token, session.meeting_id, make_tone(1))
        # corrupt the stored file behind the broker's back
        service.store.recording_path(session.meeting_id).write_bytes(b"RIFFgarbage")
        for k in range(10):
            service.submit_reaction(token.token, ReactionKind.LIKE, now_ms=T0 + k * 1000)
        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + 60_000)
        report = service.load_summary(session.meeting_id)
        assert report.snippets == ()
        assert report.warnings and "snippet extraction skipped" in report.warnings[0]

    def test_summary_json_is_canonical(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service)
        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + 60_000)
        raw = service.store.load_summary(session.meeting_id)
        report = service.load_summary(session.meeting_id)
        assert canonical_json(report.to_dict()).encode() == raw
        assert "salt" not in json.loads(raw)["meeting"]

    def test_regenerate_requires_host(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service)
        attendee_token = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + 1000)
        with pytest.raises(ForbiddenError):
            service.resolve_host(attendee_token.token, session.meeting_id)


class TestAudioBroker:
    def test_upload_to_disabled_meeting_forbidden(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service, recording=False)
        with pytest.raises(ForbiddenError):
            service.ingest_recording(host.token, session.meeting_id, make_tone(1))

    def test_upload_sets_recording_flag(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service, recording=True)
        assert service.cloud_state(session.meeting_id, now_ms=T0).recording is False
        service.ingest_recording(host.token, session.meeting_id, make_tone(1))
        assert service.cloud_state(session.meeting_id, now_ms=T0).recording is True

    def test_flag_false_after_finalize(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service, recording=True)
        service.ingest_recording(host.token, session.meeting_id, make_tone(1))
        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + 60_000)
        assert service.cloud_state(session.meeting_id, now_ms=T0 + 70_000).recording is False

    def test_reupload_replaces(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service, recording=True)
        service.ingest_recording(host.token, session.meeting_id, make_tone(1))
        replacement = make_tone(2)
        service.ingest_recording(host.token, session.meeting_id, replacement)
        assert service.store.recording_path(session.meeting_id).read_bytes() == replacement

    def test_upload_after_end_conflicts(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service, recording=True)
        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + 1000)
        with pytest.raises(ConflictError):
            service.ingest_recording(host.token, session.meeting_id, make_tone(1))

    def test_finalize_idempotent(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service, recording=True)
        token = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        service.ingest_recording(host.token, session.meeting_id, make_tone(300))
        for k in range(30):
            service.submit_reaction(token.token, ReactionKind.LIKE, now_ms=T0 + k * 1000)
        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + 300_000)
        first = service.load_summary(session.meeting_id)
        second = service.finalize(session.meeting_id)
        assert second.snippets == first.snippets
        wavs = list(service.store.snippets_dir(session.meeting_id).glob("*.wav"))
        assert len(wavs) == len(first.snippets)


class TestNotifier:
    def test_outbox_gets_one_file_per_recipient(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service)
        for i in range(5):
            service.join_meeting(session.hashtag, f"u{i}@x.com", now_ms=T0)
        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + 1000)
        outbox = service.store.outbox_dir(session.meeting_id)
        messages = sorted(outbox.glob("*.eml"))
        assert len(messages) == 5
        body = messages[0].read_text()
        assert body.startswith("To: ")
        assert "Subject: " in body
        assert f"/summary/{session.meeting_id}" in body

    def test_null_notifier_writes_nothing(self, tmp_path):
        service = make_service(tmp_path, notifier=NullNotifier())
        session, host = live_meeting(service)
        service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + 1000)
        assert not service.store.outbox_dir(session.meeting_id).exists()
        assert service.summary_status(session.meeting_id) == "ready"

    def test_failing_recipient_is_isolated(self, tmp_path):
        class Flaky(FileOutboxNotifier):
            def deliver(self, meeting_id, recipient, subject, body):
                if recipient.startswith("u2"):
                    raise RuntimeError("smtp down")
                super().deliver(meeting_id, recipient, subject, body)

        service = make_service(tmp_path)
        service.notifier = Flaky(service.store.outbox_dir)
        session, host = live_meeting(service)
        for i in range(5):
            service.join_meeting(session.hashtag, f"u{i}@x.com", now_ms=T0)
        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + 1000)
        messages = list(service.store.outbox_dir(session.meeting_id).glob("*.eml"))
        assert len(messages) == 4
        assert service.summary_status(session.meeting_id) == "ready"

    def test_regenerate_does_not_renotify(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service)
        service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        service.end_meeting(host.token, session.meeting_id, now_ms=T0 + 1000)
        service.finalize(session.meeting_id, regenerate=True)
        assert len(list(service.store.outbox_dir(session.meeting_id).glob("*.eml"))) == 1


class TestRecovery:
    def test_restart_restores_sessions_events_joins(self, tmp_path):
        service = make_service(tmp_path)
        session, host = live_meeting(service)
        token = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        for k in range(6):
            service.submit_reaction(token.token, ReactionKind.LIKE, now_ms=T0 + k * 1000)
        before = service.cloud_state(session.meeting_id, at_ms=10_000)
        service.close()

        recovered = MeetCuesService(tmp_path / "data", fsync=False)
        assert recovered.meeting(session.meeting_id).state is MeetingState.LIVE
        assert recovered.cloud_state(session.meeting_id, at_ms=10_000) == before
        # hashtag uniqueness survives restarts
        assert session.hashtag in recovered._by_hashtag

    def test_tokens_do_not_survive_restart(self, tmp_path):
        service = make_service(tmp_path)
        session, _ = live_meeting(service)
        token = service.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        service.close()
        recovered = MeetCuesService(tmp_path / "data", fsync=False)
        with pytest.raises(UnauthorizedError):
            recovered.submit_reaction(token.token, ReactionKind.LIKE, now_ms=T0)
        # rejoining restores access with the same identity
        again = recovered.join_meeting(session.hashtag, "a@x.com", now_ms=T0)
        assert again.attendee == token.attendee
