"""Recording ingestion: validation, storage, and alignment metadata.

Stands in for a telephony capture integration; recordings arrive as WAV
PCM uploads (or file paths through the CLI). A small sidecar keeps the
optional start offset so late-starting recordings stay aligned with the
meeting clock across restarts.
"""

from __future__ import annotations

import io
import json
import wave
from pathlib import Path

from .domain import AudioDecodeError
from .store import EventStore


def validate_wav(data: bytes) -> tuple[int, int, int]:
    """Check PCM 16-bit mono/stereo; returns (rate, channels, frames)."""
    try:
        with wave.open(io.BytesIO(data), "rb") as reader:
            if reader.getsampwidth() != 2:
                raise AudioDecodeError("recording must be 16-bit PCM")
            if reader.getnchannels() not in (1, 2):
                raise AudioDecodeError("recording must be mono or stereo")
            return reader.getframerate(), reader.getnchannels(), reader.getnframes()
    except (wave.Error, EOFError) as exc:
        raise AudioDecodeError(f"not a readable WAV file: {exc}") from exc


def _meta_path(store: EventStore, meeting_id: str) -> Path:
    return store.meeting_dir(meeting_id) / "recording.meta.json"


def store_recording(store: EventStore, meeting_id: str, data: bytes, offset_ms: int = 0) -> Path:
    """Validate and persist the recording; re-upload replaces (last write wins)."""
    if offset_ms < 0:
        raise AudioDecodeError("offset_ms must be non-negative")
    validate_wav(data)
    path = store.recording_path(meeting_id)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    _meta_path(store, meeting_id).write_text(json.dumps({"offset_ms": offset_ms}), encoding="utf-8")
    return path


def load_recording(store: EventStore, meeting_id: str) -> tuple[Path, int] | None:
    """The stored recording and its meeting-clock offset, if one exists."""
    path = store.recording_path(meeting_id)
    if not path.exists():
        return None
    offset_ms = 0
    meta = _meta_path(store, meeting_id)
    if meta.exists():
        offset_ms = int(json.loads(meta.read_text(encoding="utf-8")).get("offset_ms", 0))
    return path, offset_ms
