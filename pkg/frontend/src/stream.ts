// Server-push client: consumes the SSE stream over fetch streaming (works
// in browsers and node alike), reconnects with backoff, and asks the app
// to resync via the plain endpoints after every reconnect.

import type { StreamMessage } from "./types.js";

export interface StreamHandlers {
  onMessage: (message: StreamMessage) => void;
  onReconnect?: () => void | Promise<void>;
  onClose?: () => void;
}

export class PushStream {
  private stopped = false;
  private attempts = 0;

  constructor(
    private url: string,
    private handlers: StreamHandlers,
  ) {}

  start(): void {
    void this.run();
  }

  stop(): void {
    this.stopped = true;
  }

  private async run(): Promise<void> {
    let first = true;
    while (!this.stopped) {
      if (!first) {
        const backoff = Math.min(1000 * 2 ** this.attempts, 15000);
        await new Promise((resolve) => setTimeout(resolve, backoff));
        this.attempts += 1;
        if (this.stopped) return;
        await this.handlers.onReconnect?.();
      }
      first = false;
      try {
        const ended = await this.consume();
        if (ended) {
          this.handlers.onClose?.();
          return;
        }
        this.attempts = 0; // clean server close; reconnect promptly
      } catch {
        // connection failure; loop with backoff
      }
    }
  }

  /** Reads one connection to its end; true when the meeting ended. */
  private async consume(): Promise<boolean> {
    const response = await fetch(this.url, { headers: { accept: "text/event-stream" } });
    if (!response.ok || !response.body) throw new Error(`stream HTTP ${response.status}`);
    this.attempts = 0;
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    while (!this.stopped) {
      const { done, value } = await reader.read();
      if (done) return false;
      buffer += decoder.decode(value, { stream: true });
      let boundary;
      while ((boundary = buffer.indexOf("\n\n")) >= 0) {
        const frame = buffer.slice(0, boundary);
        buffer = buffer.slice(boundary + 2);
        for (const line of frame.split("\n")) {
          if (!line.startsWith("data: ")) continue; // comments/keep-alives
          const message = JSON.parse(line.slice(6)) as StreamMessage;
          this.handlers.onMessage(message);
          if ("event" in message && message.event === "ended") {
            void reader.cancel();
            return true;
          }
        }
      }
    }
    void reader.cancel();
    return false;
  }
}
