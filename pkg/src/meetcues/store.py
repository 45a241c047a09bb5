"""Durable append-only storage: the system of record every state folds from.

Layout under one data directory:

    meetings.ndjson                 meeting metadata, upsert by appending
    <meeting_id>/events.ndjson      accepted events, one JSON line each
    <meeting_id>/joins.ndjson       attendee join records
    <meeting_id>/recording.wav      uploaded meeting audio
    <meeting_id>/snippets/          cut WAV files
    <meeting_id>/summary.json       the post-meeting report
    <meeting_id>/outbox/            notifier message files

A line is flushed to the OS before the write is acknowledged, so a crashed
process can lose at most a trailing partially-written line, which replay
discards: an unterminated final line was by construction never acknowledged.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from pathlib import Path
from typing import IO

from .domain import (
    CorruptionError,
    Event,
    JoinRecord,
    MeetingSession,
    canonical_json,
)

logger = logging.getLogger(__name__)


def _read_lines(path: Path) -> tuple[list[str], bool]:
    """Complete lines of a log; a torn (unterminated) tail is truncated away.

    An unterminated final line was never acknowledged (acks happen only
    after the newline is flushed), so removing it loses nothing and keeps
    subsequent appends well-formed.
    """
    data = path.read_bytes()
    if not data:
        return [], False
    torn = not data.endswith(b"\n")
    if torn:
        keep = data.rfind(b"\n") + 1
        with open(path, "r+b") as f:
            f.truncate(keep)
        data = data[:keep]
        if not data:
            return [], True
    lines = data.decode("utf-8").split("\n")
    lines.pop()  # trailing empty piece after the final newline
    return lines, torn


class EventStore:
    """File-backed persistence for one deployment's meetings."""

    def __init__(self, data_dir: str | Path, fsync: bool = True) -> None:
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._fsync = fsync
        self._event_files: dict[str, IO[bytes]] = {}
        self._last_seq: dict[str, int] = {}
        self._meta_lock = threading.Lock()

    # -- paths -------------------------------------------------------------

    def meeting_dir(self, meeting_id: str) -> Path:
        return self.data_dir / meeting_id

    def events_path(self, meeting_id: str) -> Path:
        return self.meeting_dir(meeting_id) / "events.ndjson"

    def joins_path(self, meeting_id: str) -> Path:
        return self.meeting_dir(meeting_id) / "joins.ndjson"

    def recording_path(self, meeting_id: str) -> Path:
        return self.meeting_dir(meeting_id) / "recording.wav"

    def snippets_dir(self, meeting_id: str) -> Path:
        return self.meeting_dir(meeting_id) / "snippets"

    def summary_path(self, meeting_id: str) -> Path:
        return self.meeting_dir(meeting_id) / "summary.json"

    def outbox_dir(self, meeting_id: str) -> Path:
        return self.meeting_dir(meeting_id) / "outbox"

    @property
    def meetings_path(self) -> Path:
        return self.data_dir / "meetings.ndjson"

    # -- event log ---------------------------------------------------------

    def append(self, meeting_id: str, event: Event) -> int:
        """Durably append one event; returns the acknowledged seq."""
        expected = self.last_seq(meeting_id) + 1
        if event.seq != expected:
            raise CorruptionError(f"expected seq {expected}, got {event.seq} for meeting {meeting_id}")
        f = self._event_files.get(meeting_id)
        if f is None:
            self.meeting_dir(meeting_id).mkdir(parents=True, exist_ok=True)
            f = open(self.events_path(meeting_id), "ab")
            self._event_files[meeting_id] = f
        self._write_line(f, canonical_json(event.to_dict()))
        self._last_seq[meeting_id] = event.seq
        return event.seq

    def replay(self, meeting_id: str) -> list[Event]:
        """All acknowledged events in seq order; tolerates a torn final line."""
        path = self.events_path(meeting_id)
        if not path.exists():
            self._last_seq[meeting_id] = 0
            return []
        lines, torn = _read_lines(path)
        if torn:
            logger.warning("discarding torn final line of %s", path)
        events: list[Event] = []
        for lineno, line in enumerate(lines, start=1):
            try:
                event = Event.from_dict(json.loads(line))
            except Exception as exc:
                raise CorruptionError(f"{path}:{lineno}: unreadable event line ({exc})") from exc
            if event.seq != lineno:
                raise CorruptionError(f"{path}:{lineno}: expected seq {lineno}, found {event.seq}")
            events.append(event)
        self._last_seq[meeting_id] = events[-1].seq if events else 0
        return events

    def last_seq(self, meeting_id: str) -> int:
        if meeting_id not in self._last_seq:
            self.replay(meeting_id)
        return self._last_seq[meeting_id]

    # -- join log ----------------------------------------------------------

    def append_join(self, meeting_id: str, join: JoinRecord) -> None:
        self.meeting_dir(meeting_id).mkdir(parents=True, exist_ok=True)
        with open(self.joins_path(meeting_id), "ab") as f:
            self._write_line(f, canonical_json(join.to_dict()))

    def replay_joins(self, meeting_id: str) -> list[JoinRecord]:
        path = self.joins_path(meeting_id)
        if not path.exists():
            return []
        lines, torn = _read_lines(path)
        if torn:
            logger.warning("discarding torn final line of %s", path)
        joins = []
        for lineno, line in enumerate(lines, start=1):
            try:
                joins.append(JoinRecord.from_dict(json.loads(line)))
            except Exception as exc:
                raise CorruptionError(f"{path}:{lineno}: unreadable join line ({exc})") from exc
        return joins

    # -- meeting metadata ----------------------------------------------------

    def save_meeting(self, session: MeetingSession) -> None:
        """Upsert by appending; the latest line per meeting_id wins on load."""
        with self._meta_lock:
            with open(self.meetings_path, "ab") as f:
                self._write_line(f, canonical_json(session.to_dict(include_salt=True)))

    def load_meetings(self) -> list[MeetingSession]:
        if not self.meetings_path.exists():
            return []
        lines, torn = _read_lines(self.meetings_path)
        if torn:
            logger.warning("discarding torn final line of %s", self.meetings_path)
        latest: dict[str, MeetingSession] = {}
        for lineno, line in enumerate(lines, start=1):
            try:
                session = MeetingSession.from_dict(json.loads(line))
            except Exception as exc:
                raise CorruptionError(f"{self.meetings_path}:{lineno}: unreadable meeting line ({exc})") from exc
            latest[session.meeting_id] = session
        return list(latest.values())

    # -- summary -------------------------------------------------------------

    def save_summary(self, meeting_id: str, payload: bytes) -> Path:
        """Write summary.json atomically (temp file + rename)."""
        path = self.summary_path(meeting_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_bytes(payload)
        os.replace(tmp, path)
        return path

    def load_summary(self, meeting_id: str) -> bytes | None:
        path = self.summary_path(meeting_id)
        return path.read_bytes() if path.exists() else None

    # -- internals -----------------------------------------------------------

    def _write_line(self, f: IO[bytes], line: str) -> None:
        f.write(line.encode("utf-8") + b"\n")
        f.flush()
        if self._fsync:
            os.fsync(f.fileno())

    def close(self) -> None:
        for f in self._event_files.values():
            f.close()
        self._event_files.clear()
