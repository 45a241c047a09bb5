// Emoji cloud rendering. Color, size, and expression come straight from the
// server's EmojiState fields; the only client-side choices are the glyph
// per expression and a subtle ring on the viewer's own face.

import type { CloudState, Expression } from "./types.js";

const GLYPHS: Record<Expression, string> = {
  happy: "\u{1F60A}",
  neutral: "\u{1F610}",
  thinking: "\u{1F914}",
};

export function renderCloud(
  container: HTMLElement,
  cloud: CloudState | null,
  selfAttendee: string | null,
): void {
  container.textContent = "";
  if (!cloud) return;
  container.dataset.version = String(cloud.version);
  for (const emoji of cloud.emojis) {
    const face = container.ownerDocument.createElement("span");
    face.className = `emoji ${emoji.expression}`;
    if (selfAttendee && emoji.attendee === selfAttendee) face.classList.add("self");
    const [r, g, b] = emoji.color;
    face.style.backgroundColor = `rgb(${r}, ${g}, ${b})`;
    face.style.transform = `scale(${emoji.size_scale})`;
    face.textContent = GLYPHS[emoji.expression];
    face.title = `${emoji.like_count} likes, ${emoji.clarify_count} clarifies, ${emoji.comment_count} comments`;
    face.dataset.attendee = emoji.attendee;
    face.dataset.mood = String(emoji.mood);
    container.appendChild(face);
  }
}

export function renderRecordingDot(dot: HTMLElement, recording: boolean): void {
  dot.style.display = recording ? "inline-block" : "none";
  dot.setAttribute("aria-hidden", recording ? "false" : "true");
}
