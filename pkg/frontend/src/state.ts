// Client-side state with the version discipline: the rendered cloud always
// corresponds to the highest version received, stale push messages are
// dropped, and while the timeline is scrubbed pushes advance the version
// without touching the rendered historical cloud.

import type { CloudState, StreamMessage } from "./types.js";

export interface ClientView {
  cloud: CloudState | null;
  recording: boolean;
  ended: boolean;
  scrubbedAtMs: number | null; // null = live
}

export class ClientState {
  lastSeenVersion = -1;
  private liveCloud: CloudState | null = null;
  private historicalCloud: CloudState | null = null;
  private recording = false;
  private ended = false;
  private scrubbedAtMs: number | null = null;
  private listeners: Array<(view: ClientView) => void> = [];

  subscribe(listener: (view: ClientView) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    const view = this.view();
    for (const listener of this.listeners) listener(view);
  }

  view(): ClientView {
    return {
      cloud: this.scrubbedAtMs === null ? this.liveCloud : this.historicalCloud,
      recording: this.recording,
      ended: this.ended,
      scrubbedAtMs: this.scrubbedAtMs,
    };
  }

  get renderedVersion(): number {
    const view = this.view();
    return view.cloud ? view.cloud.version : -1;
  }

  /** Apply a push message; stale versions (<= last seen) are discarded. */
  apply(message: StreamMessage): void {
    if ("version" in message) {
      if (message.version <= this.lastSeenVersion && this.liveCloud !== null) return;
      this.lastSeenVersion = Math.max(this.lastSeenVersion, message.version);
      this.liveCloud = message.cloud;
      this.recording = message.cloud.recording;
      if (this.scrubbedAtMs === null) this.emit();
      return;
    }
    if ("recording" in message) {
      this.recording = message.recording;
      this.emit();
      return;
    }
    if (message.event === "ended") {
      this.ended = true;
      this.emit();
    }
  }

  /** Full snapshot fetched out-of-band (initial load or reconnect resync). */
  resync(cloud: CloudState): void {
    if (cloud.version >= this.lastSeenVersion || this.liveCloud === null) {
      this.lastSeenVersion = Math.max(this.lastSeenVersion, cloud.version);
      this.liveCloud = cloud;
      this.recording = cloud.recording;
      this.emit();
    }
  }

  /** Enter scrub mode: render a historical cloud until backToLive(). */
  scrubTo(atMs: number, cloud: CloudState): void {
    this.scrubbedAtMs = atMs;
    this.historicalCloud = cloud;
    this.emit();
  }

  backToLive(): void {
    this.scrubbedAtMs = null;
    this.historicalCloud = null;
    this.emit();
  }
}
