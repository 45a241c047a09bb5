// Test harness: spawns the real Python server, provides host-side meeting
// control over the wire API, and builds WAV fixtures.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, openSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface LiveServer {
  baseUrl: string;
  dataDir: string;
  stop: () => void;
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address && typeof address === "object") {
        const port = address.port;
        probe.close(() => resolve(port));
      } else {
        reject(new Error("no port"));
      }
    });
  });
}

export async function startServer(simSeed = 9): Promise<LiveServer> {
  const port = await freePort();
  const dataDir = mkdtempSync(join(tmpdir(), "meetcues-ui-"));
  const log = openSync(join(dataDir, "server.log"), "w");
  const proc: ChildProcess = spawn(
    "python3",
    [
      "-m", "meetcues.cli", "serve",
      "--listen", `127.0.0.1:${port}`,
      "--data-dir", dataDir,
      "--simulation", "--sim-seed", String(simSeed),
    ],
    { stdio: ["ignore", log, log] },
  );
  const baseUrl = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 20_000;
  for (;;) {
    try {
      const response = await fetch(`${baseUrl}/healthz`);
      if (response.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      proc.kill("SIGKILL");
      throw new Error("python server did not start");
    }
    await sleep(50);
  }
  return { baseUrl, dataDir, stop: () => proc.kill("SIGKILL") };
}

export function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export async function waitFor(check: () => boolean, timeoutMs = 8000, stepMs = 20): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!check()) {
    if (Date.now() > deadline) throw new Error("condition not reached in time");
    await sleep(stepMs);
  }
}

/** Host-side driver: creates/starts/ends meetings and uploads audio.
 *
 * The UI under test is a production client and never sends the simulated
 * time header, so the meeting clock is anchored to the real wall clock:
 * atMs arguments here are meeting-relative and get translated to
 * wall-epoch simulated timestamps.
 */
export class HostControl {
  meetingId = "";
  hashtag = "";
  startedWallMs = 0;
  private hostToken = "";

  constructor(private baseUrl: string) {}

  private headers(atMs: number): Record<string, string> {
    return {
      "content-type": "application/json",
      authorization: `Bearer ${this.hostToken}`,
      "x-sim-time-ms": String(this.startedWallMs + atMs),
    };
  }

  async createAndStart(title = "UI test meeting", recording = false): Promise<void> {
    this.startedWallMs = Date.now();
    const created = await (
      await fetch(`${this.baseUrl}/api/meetings`, {
        method: "POST",
        headers: { "content-type": "application/json", "x-sim-time-ms": String(this.startedWallMs) },
        body: JSON.stringify({ host_id: "ui-host", title, recording_enabled: recording }),
      })
    ).json();
    this.meetingId = created.meeting.meeting_id;
    this.hashtag = created.meeting.hashtag;
    this.hostToken = created.host_token.token;
    await fetch(`${this.baseUrl}/api/meetings/${this.meetingId}/start`, {
      method: "POST",
      headers: this.headers(0),
    });
  }

  async end(atMs: number): Promise<void> {
    await fetch(`${this.baseUrl}/api/meetings/${this.meetingId}/end?wait=true`, {
      method: "POST",
      headers: this.headers(atMs),
    });
  }

  async uploadTone(durationS: number): Promise<void> {
    await fetch(`${this.baseUrl}/api/meetings/${this.meetingId}/recording`, {
      method: "PUT",
      headers: { ...this.headers(0), "content-type": "audio/wav" },
      body: makeToneWav(durationS),
    });
  }

  /** Attendee-side event post at a meeting-relative timestamp. */
  async postEvent(token: string, body: unknown, atMs: number): Promise<Response> {
    return fetch(`${this.baseUrl}/api/meetings/${this.meetingId}/events`, {
      method: "POST",
      headers: {
        "content-type": "application/json",
        authorization: `Bearer ${token}`,
        "x-sim-time-ms": String(this.startedWallMs + atMs),
      },
      body: JSON.stringify(body),
    });
  }

  async joinToken(email: string): Promise<{ token: string; attendee: string }> {
    const token = await (
      await fetch(`${this.baseUrl}/api/meetings/${this.hashtag}/join`, {
        method: "POST",
        headers: { "content-type": "application/json", "x-sim-time-ms": String(this.startedWallMs) },
        body: JSON.stringify({ email }),
      })
    ).json();
    return token;
  }
}

/** 16-bit PCM mono sine tone, built byte-by-byte. */
export function makeToneWav(durationS: number, rate = 8000): Uint8Array {
  const frames = Math.floor(durationS * rate);
  const dataSize = frames * 2;
  const buffer = new ArrayBuffer(44 + dataSize);
  const view = new DataView(buffer);
  const ascii = (offset: number, text: string) => {
    for (let i = 0; i < text.length; i++) view.setUint8(offset + i, text.charCodeAt(i));
  };
  ascii(0, "RIFF");
  view.setUint32(4, 36 + dataSize, true);
  ascii(8, "WAVE");
  ascii(12, "fmt ");
  view.setUint32(16, 16, true);
  view.setUint16(20, 1, true); // PCM
  view.setUint16(22, 1, true); // mono
  view.setUint32(24, rate, true);
  view.setUint32(28, rate * 2, true);
  view.setUint16(32, 2, true);
  view.setUint16(34, 16, true);
  ascii(36, "data");
  view.setUint32(40, dataSize, true);
  for (let i = 0; i < frames; i++) {
    view.setInt16(44 + i * 2, Math.round(12000 * Math.sin(i / 8)), true);
  }
  return new Uint8Array(buffer);
}
