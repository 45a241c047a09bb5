// Post-meeting summary view: final cloud, per-minute bars, one audio player
// per snippet, and both comment orderings side by side.

import { renderCloud } from "./cloud.js";
import type { MeetCuesApi } from "./api.js";
import type { SummaryReport } from "./types.js";

function formatSpan(startS: number, endS: number): string {
  const mmss = (s: number) => {
    const total = Math.floor(s);
    return `${String(Math.floor(total / 60)).padStart(2, "0")}:${String(total % 60).padStart(2, "0")}`;
  };
  return `${mmss(startS)}–${mmss(endS)}`;
}

export function renderSummary(
  container: HTMLElement,
  report: SummaryReport,
  api: MeetCuesApi,
  selfAttendee: string | null,
): void {
  container.textContent = "";
  const doc = container.ownerDocument;

  const heading = doc.createElement("h2");
  heading.textContent = `${report.meeting.title} — summary`;
  container.appendChild(heading);

  const meta = doc.createElement("p");
  meta.className = "summary-meta";
  meta.textContent = `${report.attendee_count} attendees`;
  container.appendChild(meta);

  const cloudBox = doc.createElement("div");
  cloudBox.className = "cloud summary-cloud";
  renderCloud(cloudBox, report.cloud, selfAttendee);
  container.appendChild(cloudBox);

  const bars = doc.createElement("div");
  bars.className = "summary-bars";
  const maxCount = Math.max(1, ...report.timeline.map((b) => b.reactions + b.comments));
  for (const bucket of report.timeline) {
    const bar = doc.createElement("div");
    bar.className = "summary-bar";
    bar.dataset.minute = String(bucket.start_s / 60);
    const height = Math.round(((bucket.reactions + bucket.comments) / maxCount) * 100);
    bar.style.height = `${Math.max(1, height)}%`;
    bar.title = `${bucket.reactions} reactions, ${bucket.comments} comments`;
    bars.appendChild(bar);
  }
  container.appendChild(bars);

  if (report.snippets.length > 0) {
    const section = doc.createElement("section");
    section.className = "snippets";
    const label = doc.createElement("h3");
    label.textContent = "Memorable moments";
    section.appendChild(label);
    report.snippets.forEach((snippet, index) => {
      const row = doc.createElement("div");
      row.className = "snippet";
      const caption = doc.createElement("span");
      caption.textContent = formatSpan(snippet.start_s, snippet.end_s);
      const player = doc.createElement("audio");
      player.controls = true;
      player.src = api.snippetUrl(report.meeting.meeting_id, index);
      row.appendChild(caption);
      row.appendChild(player);
      section.appendChild(row);
    });
    container.appendChild(section);
  }

  const columns = doc.createElement("div");
  columns.className = "summary-comments";
  for (const [title, entries] of [
    ["Chronological", report.comments_chrono],
    ["By popularity", report.comments_popular],
  ] as const) {
    const column = doc.createElement("div");
    const label = doc.createElement("h3");
    label.textContent = title;
    column.appendChild(label);
    const list = doc.createElement("ol");
    for (const entry of entries) {
      const item = doc.createElement("li");
      item.dataset.commentId = entry.comment_id;
      item.textContent = `▲${entry.upvotes} ${entry.text}`;
      list.appendChild(item);
    }
    column.appendChild(list);
    columns.appendChild(column);
  }
  container.appendChild(columns);

  if (report.warnings.length > 0) {
    const warnings = doc.createElement("ul");
    warnings.className = "warnings";
    for (const warning of report.warnings) {
      const item = doc.createElement("li");
      item.textContent = warning;
      warnings.appendChild(item);
    }
    container.appendChild(warnings);
  }
}
