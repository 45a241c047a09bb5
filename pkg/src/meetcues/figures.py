"""Report rendering: timeline CSV plus matplotlib figures for the summary.

The CLI's report path drops these next to summary.json so a meeting can be
reviewed without running the UI: a per-minute engagement bar chart with the
snippet threshold marked, and the final emoji cloud.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Arc, Circle

from .domain import CloudState, SummaryReport, TimelineBucket

TIMELINE_CSV_FIELDS = ["index", "start_s", "reactions", "comments", "upvotes", "raw", "norm"]


def write_timeline_csv(buckets: Sequence[TimelineBucket], path: Path) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=TIMELINE_CSV_FIELDS)
        writer.writeheader()
        for bucket in buckets:
            writer.writerow(bucket.to_dict())
    return path


def save_timeline_figure(
    buckets: Sequence[TimelineBucket],
    path: Path,
    threshold: float | None = None,
    title: str = "Engagement per minute",
) -> Path:
    minutes = [b.start_s / 60 for b in buckets]
    fig, ax = plt.subplots(figsize=(max(6, len(buckets) * 0.12), 3.2))
    ax.bar(minutes, [b.reactions for b in buckets], width=0.9, label="reactions", color="#00a39b")
    ax.bar(
        minutes,
        [b.comments for b in buckets],
        width=0.9,
        bottom=[b.reactions for b in buckets],
        label="comments",
        color="#f4c20d",
    )
    ax.set_xlabel("minute")
    ax.set_ylabel("events")
    ax.set_title(title)
    if threshold is not None and buckets:
        twin = ax.twinx()
        twin.plot(minutes, [b.norm for b in buckets], color="#444444", linewidth=1.0, label="norm")
        twin.axhline(threshold, color="#c0392b", linestyle="--", linewidth=1.0)
        twin.set_ylim(0, 1.05)
        twin.set_ylabel("normalized")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_cloud_figure(cloud: CloudState, path: Path, title: str = "Room mood") -> Path:
    """Grid of faces: fill color from mood, radius from comment volume."""
    n = max(1, len(cloud.emojis))
    cols = max(1, math.ceil(math.sqrt(n)))
    rows = math.ceil(n / cols)
    fig, ax = plt.subplots(figsize=(max(3, cols * 0.9), max(3, rows * 0.9)))
    ax.set_xlim(-0.5, cols - 0.5)
    ax.set_ylim(-0.5, rows - 0.5)
    ax.set_aspect("equal")
    ax.axis("off")
    ax.set_title(f"{title} ({len(cloud.emojis)} attendees)")
    for i, emoji in enumerate(cloud.emojis):
        x, y = i % cols, rows - 1 - i // cols
        radius = 0.18 * emoji.size_scale
        face = tuple(c / 255 for c in emoji.color)
        ax.add_patch(Circle((x, y), radius, facecolor=face, edgecolor="#333333", linewidth=0.6))
        eye_dx, eye_dy = radius * 0.35, radius * 0.25
        for sx in (-1, 1):
            ax.add_patch(Circle((x + sx * eye_dx, y + eye_dy), radius * 0.09, facecolor="#222222"))
        mouth_w, mouth_y = radius * 0.9, y - radius * 0.25
        if emoji.expression.value == "happy":
            ax.add_patch(Arc((x, mouth_y), mouth_w, radius * 0.6, theta1=200, theta2=340, lw=1.0))
        elif emoji.expression.value == "thinking":
            ax.add_patch(Arc((x, mouth_y - radius * 0.15), mouth_w, radius * 0.6, theta1=20, theta2=160, lw=1.0))
        else:
            ax.plot([x - mouth_w / 2, x + mouth_w / 2], [mouth_y, mouth_y], color="#222222", lw=1.0)
    if cloud.recording:
        ax.add_patch(Circle((cols - 0.6, rows - 0.6), 0.08, facecolor="#c0392b"))
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_report_files(report: SummaryReport, out_dir: Path, threshold: float = 0.3) -> dict[str, Path]:
    """Render the delimited output and both figures for one summary."""
    out_dir.mkdir(parents=True, exist_ok=True)
    return {
        "timeline_csv": write_timeline_csv(report.timeline, out_dir / "timeline.csv"),
        "timeline_png": save_timeline_figure(
            report.timeline, out_dir / "timeline.png", threshold, title=f"Engagement: {report.meeting.title}"
        ),
        "cloud_png": save_cloud_figure(report.cloud, out_dir / "cloud.png"),
    }
