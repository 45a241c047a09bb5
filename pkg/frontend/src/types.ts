// Wire types, mirroring the server's canonical JSON schemas. The UI never
// computes mood/engagement values itself; it renders these fields verbatim.

export type Expression = "happy" | "neutral" | "thinking";

export interface EmojiState {
  attendee: string;
  like_count: number;
  clarify_count: number;
  comment_count: number;
  mood: number;
  color: [number, number, number];
  size_scale: number;
  expression: Expression;
}

export interface CloudState {
  meeting_id: string;
  version: number;
  at_ms: number;
  emojis: EmojiState[];
  recording: boolean;
}

export interface TimelineBucket {
  index: number;
  start_s: number;
  reactions: number;
  comments: number;
  upvotes: number;
  raw: number;
  norm: number;
}

export interface CommentEntry {
  comment_id: string;
  seq: number;
  ts_ms: number;
  attendee: string;
  text: string;
  upvotes: number;
}

export interface Meeting {
  meeting_id: string;
  hashtag: string;
  title: string;
  host_id: string;
  recording_enabled: boolean;
  state: "created" | "live" | "ended";
  started_at: number | null;
  ended_at: number | null;
}

export interface SessionToken {
  token: string;
  meeting_id: string;
  attendee: string;
  issued_at: number;
}

export interface AudioSnippet {
  meeting_id: string;
  start_s: number;
  end_s: number;
  path: string;
  peak_norm: number;
}

export interface SummaryReport {
  meeting: Meeting;
  attendee_count: number;
  cloud: CloudState;
  timeline: TimelineBucket[];
  snippets: AudioSnippet[];
  comments_chrono: CommentEntry[];
  comments_popular: CommentEntry[];
  warnings: string[];
}

export type StreamMessage =
  | { version: number; cloud: CloudState }
  | { recording: boolean }
  | { event: "ended" };

export type CommentOrder = "chrono" | "popularity";
