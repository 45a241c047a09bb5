// Thin typed client over the wire API. One fetch per user action; errors
// surface as ApiError with the server's error code and message.

import type {
  CloudState,
  CommentEntry,
  CommentOrder,
  Meeting,
  SessionToken,
  SummaryReport,
  TimelineBucket,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<never> {
  let code = "http";
  let message = `HTTP ${response.status}`;
  try {
    const body = await response.json();
    code = body.error ?? body.status ?? code;
    message = body.message ?? message;
  } catch {
    // non-JSON error body; keep the defaults
  }
  throw new ApiError(response.status, code, message);
}

export class MeetCuesApi {
  constructor(
    public baseUrl: string,
    public token: string | null = null,
  ) {}

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { "content-type": "application/json" };
    if (this.token) headers["authorization"] = `Bearer ${this.token}`;
    return headers;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers: this.headers(),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  async join(hashtag: string, email: string): Promise<SessionToken> {
    const token = await this.request<SessionToken>("POST", `/api/meetings/${hashtag}/join`, { email });
    this.token = token.token;
    return token;
  }

  meeting(meetingId: string): Promise<Meeting> {
    return this.request("GET", `/api/meetings/${meetingId}`);
  }

  sendReaction(meetingId: string, kind: "like" | "clarify"): Promise<{ seq: number }> {
    return this.request("POST", `/api/meetings/${meetingId}/events`, { type: "reaction", kind });
  }

  sendComment(meetingId: string, text: string): Promise<{ seq: number }> {
    return this.request("POST", `/api/meetings/${meetingId}/events`, { type: "comment", text });
  }

  sendUpvote(meetingId: string, commentId: string): Promise<{ seq: number }> {
    return this.request("POST", `/api/meetings/${meetingId}/events`, {
      type: "upvote",
      comment_id: commentId,
    });
  }

  state(meetingId: string, atMs?: number): Promise<CloudState> {
    const query = atMs === undefined ? "" : `?at_ms=${atMs}`;
    return this.request("GET", `/api/meetings/${meetingId}/state${query}`);
  }

  comments(meetingId: string, order: CommentOrder): Promise<CommentEntry[]> {
    return this.request("GET", `/api/meetings/${meetingId}/comments?order=${order}`);
  }

  timeline(meetingId: string): Promise<TimelineBucket[]> {
    return this.request("GET", `/api/meetings/${meetingId}/timeline`);
  }

  async summary(meetingId: string): Promise<SummaryReport | "pending"> {
    const response = await fetch(`${this.baseUrl}/api/meetings/${meetingId}/summary`);
    if (response.status === 404) {
      return "pending";
    }
    if (!response.ok) await parseError(response);
    return (await response.json()) as SummaryReport;
  }

  snippetUrl(meetingId: string, index: number): string {
    return `${this.baseUrl}/api/meetings/${meetingId}/snippets/${index}`;
  }

  streamUrl(meetingId: string): string {
    return `${this.baseUrl}/api/meetings/${meetingId}/stream?token=${this.token}`;
  }
}

// Client-side syntactic check mirroring the server rule: exactly one "@",
// non-empty local and domain parts. Runs before any request is sent.
export function emailLooksValid(email: string): boolean {
  const trimmed = email.trim();
  const at = trimmed.indexOf("@");
  return at > 0 && at === trimmed.lastIndexOf("@") && at < trimmed.length - 1;
}
