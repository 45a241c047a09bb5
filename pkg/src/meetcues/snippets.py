"""Engagement-driven audio snippet extraction.

Pipeline: bucket the event log into slices, normalize engagement, keep the
slices at or above the threshold, merge consecutive keepers into intervals,
and cut those intervals out of the meeting recording. Audio handling is
WAV PCM 16-bit only, via the stdlib wave module, so cuts are sample-exact
and byte-for-byte reproducible.
"""

from __future__ import annotations

import io
import wave
from pathlib import Path
from typing import Sequence

from .domain import (
    AudioDecodeError,
    AudioSnippet,
    ConflictError,
    DomainValidationError,
    Event,
    MeetingSession,
    SnippetConfig,
    TimelineBucket,
    _time_num,
)
from .mood import timeline

Interval = tuple[float, float]


def select_buckets(buckets: Sequence[TimelineBucket], threshold: float) -> list[bool]:
    """Mark slices whose normalized engagement reaches the threshold (inclusive)."""
    if not 0.0 < threshold <= 1.0:
        raise DomainValidationError("threshold must lie in (0, 1]")
    return [b.norm >= threshold for b in buckets]


def merge_runs(
    mask: Sequence[bool],
    bucket_s: float = 60,
    pad_s: float = 0.0,
    duration_s: float | None = None,
) -> list[Interval]:
    """Turn maximal runs of selected slices into disjoint sorted intervals.

    Each run [i..j] becomes [i*bucket - pad, (j+1)*bucket + pad], clamped to
    [0, duration_s]. Padding can make neighbouring runs touch; touching or
    overlapping intervals are coalesced so the result stays disjoint.
    """
    intervals: list[Interval] = []
    run_start: int | None = None
    for i, selected in enumerate(list(mask) + [False]):
        if selected and run_start is None:
            run_start = i
        elif not selected and run_start is not None:
            start = run_start * bucket_s - pad_s
            end = i * bucket_s + pad_s
            intervals.append((start, end))
            run_start = None
    clamped: list[Interval] = []
    for start, end in intervals:
        start = max(0.0, start)
        if duration_s is not None:
            end = min(end, duration_s)
        if end > start:
            clamped.append((start, end))
    merged: list[Interval] = []
    for start, end in clamped:
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(end, merged[-1][1]))
        else:
            merged.append((start, end))
    return merged


# ---------------------------------------------------------------------------
# WAV handling
# ---------------------------------------------------------------------------


def _open_wav(source: bytes | str | Path) -> wave.Wave_read:
    try:
        if isinstance(source, (str, Path)):
            reader = wave.open(str(source), "rb")
        else:
            reader = wave.open(io.BytesIO(source), "rb")
    except (wave.Error, EOFError) as exc:
        raise AudioDecodeError(f"not a readable WAV file: {exc}") from exc
    if reader.getsampwidth() != 2:
        reader.close()
        raise AudioDecodeError("recording must be 16-bit PCM")
    if reader.getnchannels() not in (1, 2):
        reader.close()
        raise AudioDecodeError("recording must be mono or stereo")
    return reader


def cut_wav(source: bytes | str | Path, intervals: Sequence[Interval]) -> list[bytes]:
    """Cut one standalone WAV per interval, preserving the source format.

    Frame range per interval is [floor(start*rate), min(floor(end*rate),
    total)); the output data region is the corresponding byte slice of the
    source data region.
    """
    with _open_wav(source) as reader:
        rate = reader.getframerate()
        channels = reader.getnchannels()
        width = reader.getsampwidth()
        total = reader.getnframes()
        outputs: list[bytes] = []
        for start_s, end_s in intervals:
            start = max(0, int(start_s * rate))
            end = min(int(end_s * rate), total)
            if end > start:
                reader.setpos(start)
                frames = reader.readframes(end - start)
            else:
                frames = b""
            buf = io.BytesIO()
            with wave.open(buf, "wb") as writer:
                writer.setnchannels(channels)
                writer.setsampwidth(width)
                writer.setframerate(rate)
                writer.writeframes(frames)
            outputs.append(buf.getvalue())
    return outputs


def snippet_filename(index: int, start_s: float, end_s: float) -> str:
    return f"{index}_{_time_num(start_s)}-{_time_num(end_s)}.wav"


def extract_snippets(
    events: Sequence[Event],
    recording: bytes | str | Path | None,
    session: MeetingSession,
    config: SnippetConfig,
    out_dir: Path,
    audio_offset_s: float = 0.0,
) -> list[AudioSnippet]:
    """Run the full pipeline for an ended meeting and write the cut files.

    `audio_offset_s` is where the recording starts on the meeting clock;
    snippet boundaries stay in meeting time. Returns [] when the meeting
    was not recorded or no recording exists. Raises AudioDecodeError for a
    corrupt recording; the summary pipeline downgrades that to a warning
    and zero snippets.
    """
    if session.duration_ms is None:
        raise ConflictError("snippets are extracted only after the meeting ends")
    if not session.recording_enabled or recording is None:
        return []
    duration_s = session.duration_ms / 1000
    if duration_s <= 0:
        return []
    buckets = timeline(events, duration_s, config)
    mask = select_buckets(buckets, config.threshold)
    intervals = merge_runs(mask, config.bucket_s, config.pad_s, duration_s)
    if not intervals:
        return []
    cuts = cut_wav(recording, [(s - audio_offset_s, e - audio_offset_s) for s, e in intervals])
    out_dir.mkdir(parents=True, exist_ok=True)
    snippets: list[AudioSnippet] = []
    for index, ((start_s, end_s), data) in enumerate(zip(intervals, cuts)):
        name = snippet_filename(index, start_s, end_s)
        (out_dir / name).write_bytes(data)
        covered = [b for b in buckets if b.start_s < end_s and b.start_s + config.bucket_s > start_s]
        snippets.append(
            AudioSnippet(
                meeting_id=session.meeting_id,
                start_s=start_s,
                end_s=end_s,
                path=f"{session.meeting_id}/snippets/{name}",
                peak_norm=max(b.norm for b in covered),
            )
        )
    return snippets
