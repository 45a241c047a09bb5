// Timeline bars: one clickable column per minute bucket, heights
// proportional to the server-computed counts. Clicking a bucket asks the
// app to scrub to that moment; the "live" control resumes streaming.

import type { TimelineBucket } from "./types.js";

export interface TimelineHandlers {
  onBucketClick: (bucket: TimelineBucket) => void;
  onLiveClick: () => void;
}

export function renderTimeline(
  container: HTMLElement,
  buckets: TimelineBucket[],
  handlers: TimelineHandlers,
  selectedIndex: number | null = null,
): void {
  container.textContent = "";
  const doc = container.ownerDocument;
  const maxCount = Math.max(1, ...buckets.map((b) => b.reactions + b.comments));
  const bars = doc.createElement("div");
  bars.className = "timeline-bars";
  for (const bucket of buckets) {
    const bar = doc.createElement("button");
    bar.className = "timeline-bar";
    if (bucket.index === selectedIndex) bar.classList.add("selected");
    bar.dataset.index = String(bucket.index);
    bar.dataset.startS = String(bucket.start_s);
    bar.dataset.norm = String(bucket.norm);
    const height = Math.round(((bucket.reactions + bucket.comments) / maxCount) * 100);
    bar.style.height = `${Math.max(2, height)}%`;
    bar.title = `minute ${bucket.start_s / 60}: ${bucket.reactions} reactions, ${bucket.comments} comments`;
    bar.addEventListener("click", () => handlers.onBucketClick(bucket));
    bars.appendChild(bar);
  }
  const live = doc.createElement("button");
  live.className = "timeline-live";
  live.textContent = "live";
  live.addEventListener("click", () => handlers.onLiveClick());
  container.appendChild(bars);
  container.appendChild(live);
}
