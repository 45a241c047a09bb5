"""Brute-force reference computations used to cross-check the engines.

Nothing here shares code with mood.py or snippets.py: buckets are counted
by scanning every event for every bucket (vectorized with numpy so large
randomized sweeps stay fast), runs are merged by walking seconds-level
membership, and clouds are folded with a from-scratch dictionary scan.
The verify CLI and the randomized test suites compare engine output
against these.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .domain import (
    AttendeeId,
    CommentPayload,
    Event,
    JoinRecord,
    ReactionKind,
    ReactionPayload,
    SnippetConfig,
    UpvotePayload,
)


def bucket_counts(
    events: Sequence[Event],
    duration_s: float,
    bucket_s: int = 60,
) -> list[tuple[int, int, int]]:
    """(reactions, comments, upvotes) per bucket, one full scan per bucket."""
    n = math.ceil(duration_s / bucket_s)
    if n <= 0:
        return []
    ts = np.array([e.ts_ms for e in events], dtype=np.int64)
    kind = np.array(
        [0 if isinstance(e.payload, ReactionPayload) else 1 if isinstance(e.payload, CommentPayload) else 2 for e in events],
        dtype=np.int64,
    )
    out: list[tuple[int, int, int]] = []
    for i in range(n):
        lo = i * bucket_s * 1000
        hi = (i + 1) * bucket_s * 1000
        if i == n - 1:
            in_window = ts >= lo  # events stamped at the exact end fall in the final bucket
        else:
            in_window = (ts >= lo) & (ts < hi)
        out.append(
            (
                int(np.count_nonzero(in_window & (kind == 0))),
                int(np.count_nonzero(in_window & (kind == 1))),
                int(np.count_nonzero(in_window & (kind == 2))),
            )
        )
    return out


def normalized_engagement(
    counts: Sequence[tuple[int, int, int]],
    weights: tuple[float, float, float] = (1.0, 1.0, 0.0),
    normalization: str = "max",
) -> list[float]:
    raws = [weights[0] * r + weights[1] * c + weights[2] * u for r, c, u in counts]
    denom = max(raws) if normalization == "max" else sum(raws)
    if denom <= 0:
        return [0.0] * len(raws)
    return [raw / denom for raw in raws]


def threshold_mask(norms: Sequence[float], threshold: float) -> list[bool]:
    return [norm >= threshold for norm in norms]


def merged_intervals(
    mask: Sequence[bool],
    bucket_s: float = 60,
    pad_s: float = 0.0,
    duration_s: float | None = None,
) -> list[tuple[float, float]]:
    """Reference merge: expand each selected bucket, then coalesce by overlap."""
    spans = []
    for i, selected in enumerate(mask):
        if selected:
            start = max(0.0, i * bucket_s - pad_s)
            end = (i + 1) * bucket_s + pad_s
            if duration_s is not None:
                end = min(end, duration_s)
            if end > start:
                spans.append((start, end))
    merged: list[tuple[float, float]] = []
    for start, end in spans:
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def snippet_intervals(
    events: Sequence[Event],
    duration_s: float,
    config: SnippetConfig,
) -> list[tuple[float, float]]:
    """The whole snippet-selection pipeline, recomputed from the raw events."""
    counts = bucket_counts(events, duration_s, config.bucket_s)
    norms = normalized_engagement(counts, config.weights, config.normalization)
    mask = threshold_mask(norms, config.threshold)
    return merged_intervals(mask, config.bucket_s, config.pad_s, duration_s)


def fold_cloud_counts(
    events: Sequence[Event],
    joins: Sequence[JoinRecord],
    at_ms: int,
) -> tuple[dict[AttendeeId, tuple[int, int, int]], int, set[AttendeeId]]:
    """From-scratch fold: per-attendee (likes, clarifies, comments), version, joined set."""
    tallies: dict[AttendeeId, list[int]] = {}
    version = 0
    for event in events:
        if event.ts_ms > at_ms:
            continue
        version = max(version, event.seq)
        t = tallies.setdefault(event.attendee, [0, 0, 0])
        payload = event.payload
        if isinstance(payload, ReactionPayload):
            if payload.kind is ReactionKind.LIKE:
                t[0] += 1
            else:
                t[1] += 1
        elif isinstance(payload, CommentPayload):
            t[2] += 1
    joined = {j.attendee for j in joins if j.ts_ms <= at_ms}
    return {k: (v[0], v[1], v[2]) for k, v in tallies.items()}, version, joined


def comment_orderings(events: Sequence[Event]) -> tuple[list[str], list[str]]:
    """(chrono ids, popularity ids) by brute-force stable sorting."""
    seqs: dict[str, int] = {}
    votes: dict[str, set[AttendeeId]] = {}
    for event in events:
        payload = event.payload
        if isinstance(payload, CommentPayload):
            seqs[payload.comment_id] = event.seq
            votes.setdefault(payload.comment_id, set())
        elif isinstance(payload, UpvotePayload):
            votes.setdefault(payload.comment_id, set()).add(event.attendee)
    chrono = sorted(seqs, key=lambda cid: seqs[cid])
    popular = sorted(chrono, key=lambda cid: (-len(votes[cid]), seqs[cid]))
    return chrono, popular
