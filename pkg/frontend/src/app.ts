// Application wiring: join screen -> live view -> summary view, one push
// subscription per session, resync-on-reconnect, and scrub mode.

import { ApiError, MeetCuesApi, emailLooksValid } from "./api.js";
import { renderCloud, renderRecordingDot } from "./cloud.js";
import { renderComments } from "./comments.js";
import { renderSummary } from "./summary.js";
import { renderTimeline } from "./timeline.js";
import { ClientState } from "./state.js";
import { PushStream } from "./stream.js";
import type { CommentOrder, TimelineBucket } from "./types.js";

const SUMMARY_POLL_MS = 1500;

export class MeetCuesApp {
  readonly api: MeetCuesApi;
  readonly state = new ClientState();
  meetingId: string | null = null;
  selfAttendee: string | null = null;
  order: CommentOrder = "chrono";
  selectedBucket: number | null = null;
  bucketSpanS = 60;
  private stream: PushStream | null = null;
  private controlsEnabled = true;
  private readonly doc: Document;

  constructor(
    private root: HTMLElement,
    baseUrl: string,
  ) {
    this.api = new MeetCuesApi(baseUrl);
    this.doc = root.ownerDocument;
    this.state.subscribe(() => this.renderLiveState());
  }

  // -- join screen --------------------------------------------------------

  showJoin(): void {
    this.root.innerHTML = `
      <form id="join-form">
        <h1>Join a meeting</h1>
        <label>Hashtag <input id="hashtag" name="hashtag" maxlength="6" autocomplete="off"></label>
        <label>Email <input id="email" name="email" type="text"></label>
        <button id="join-button" type="submit">Join</button>
        <p id="join-error" class="error" role="alert"></p>
      </form>`;
    const form = this.doc.getElementById("join-form") as HTMLFormElement;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const hashtag = (this.doc.getElementById("hashtag") as HTMLInputElement).value.trim();
      const email = (this.doc.getElementById("email") as HTMLInputElement).value;
      void this.join(hashtag, email);
    });
  }

  private setJoinError(message: string): void {
    const box = this.doc.getElementById("join-error");
    if (box) box.textContent = message;
  }

  async join(hashtag: string, email: string): Promise<boolean> {
    if (!emailLooksValid(email)) {
      this.setJoinError("That does not look like an email address.");
      return false;
    }
    try {
      const token = await this.api.join(hashtag, email.trim());
      this.meetingId = token.meeting_id;
      this.selfAttendee = token.attendee;
    } catch (error) {
      if (error instanceof ApiError) {
        this.setJoinError(
          error.status === 404
            ? "No meeting with that hashtag."
            : error.status === 410
              ? "That meeting has already ended."
              : error.message,
        );
        return false;
      }
      throw error;
    }
    await this.enterLive();
    return true;
  }

  // -- live view -----------------------------------------------------------

  async enterLive(): Promise<void> {
    this.root.innerHTML = `
      <div id="live-view">
        <header>
          <span id="recording-dot" class="recording-dot" title="recording"></span>
          <span id="notice" class="notice"></span>
        </header>
        <div id="cloud" class="cloud"></div>
        <div id="timeline" class="timeline"></div>
        <div class="actions">
          <button id="like-button">like</button>
          <button id="clarify-button">clarify</button>
        </div>
        <form id="composer">
          <input id="comment-input" placeholder="Comment without interrupting...">
          <button id="send-comment" type="submit">send</button>
        </form>
        <div id="comments"></div>
      </div>`;
    this.doc.getElementById("like-button")!.addEventListener("click", () => void this.react("like"));
    this.doc.getElementById("clarify-button")!.addEventListener("click", () => void this.react("clarify"));
    (this.doc.getElementById("composer") as HTMLFormElement).addEventListener("submit", (event) => {
      event.preventDefault();
      const input = this.doc.getElementById("comment-input") as HTMLInputElement;
      if (input.value.trim()) {
        void this.comment(input.value);
        input.value = "";
      }
    });

    const meetingId = this.meetingId!;
    const cloud = await this.api.state(meetingId);
    this.state.resync(cloud);
    await this.refreshComments();
    await this.refreshTimeline();

    this.stream = new PushStream(this.api.streamUrl(meetingId), {
      onMessage: (message) => {
        this.state.apply(message);
        if ("version" in message) void this.refreshComments();
        if ("event" in message && message.event === "ended") void this.onMeetingEnded();
      },
      onReconnect: async () => {
        const fresh = await this.api.state(meetingId);
        this.state.resync(fresh);
        await this.refreshComments();
      },
    });
    this.stream.start();
  }

  private renderLiveState(): void {
    const cloudBox = this.doc.getElementById("cloud");
    const dot = this.doc.getElementById("recording-dot");
    if (!cloudBox || !dot) return; // not on the live screen
    const view = this.state.view();
    renderCloud(cloudBox as HTMLElement, view.cloud, this.selfAttendee);
    renderRecordingDot(dot as HTMLElement, view.recording);
  }

  async react(kind: "like" | "clarify"): Promise<void> {
    if (!this.controlsEnabled) return;
    try {
      await this.api.sendReaction(this.meetingId!, kind);
    } catch (error) {
      this.handleActionError(error);
    }
  }

  async comment(text: string): Promise<void> {
    if (!this.controlsEnabled) return;
    try {
      await this.api.sendComment(this.meetingId!, text);
      await this.refreshComments();
    } catch (error) {
      this.handleActionError(error);
    }
  }

  async upvote(commentId: string): Promise<void> {
    if (!this.controlsEnabled) return;
    try {
      await this.api.sendUpvote(this.meetingId!, commentId);
      await this.refreshComments();
    } catch (error) {
      this.handleActionError(error);
    }
  }

  private handleActionError(error: unknown): void {
    if (error instanceof ApiError && error.status === 409) {
      this.disableControls("The meeting has ended; reactions are closed.");
      return;
    }
    throw error;
  }

  private disableControls(message: string): void {
    this.controlsEnabled = false;
    for (const id of ["like-button", "clarify-button", "send-comment", "comment-input"]) {
      const element = this.doc.getElementById(id) as HTMLButtonElement | HTMLInputElement | null;
      if (element) element.disabled = true;
    }
    const notice = this.doc.getElementById("notice");
    if (notice) notice.textContent = message;
  }

  async refreshComments(): Promise<void> {
    const container = this.doc.getElementById("comments");
    if (!container || !this.meetingId) return;
    const entries = await this.api.comments(this.meetingId, this.order);
    renderComments(
      container as HTMLElement,
      entries,
      this.order,
      {
        onUpvote: (commentId) => void this.upvote(commentId),
        onToggleOrder: (order) => void this.setOrder(order),
      },
      this.controlsEnabled,
    );
  }

  async setOrder(order: CommentOrder): Promise<void> {
    this.order = order;
    await this.refreshComments();
  }

  async refreshTimeline(): Promise<void> {
    const container = this.doc.getElementById("timeline");
    if (!container || !this.meetingId) return;
    const buckets = await this.api.timeline(this.meetingId);
    if (buckets.length > 1) this.bucketSpanS = buckets[1].start_s - buckets[0].start_s;
    renderTimeline(
      container as HTMLElement,
      buckets,
      {
        onBucketClick: (bucket) => void this.scrubTo(bucket),
        onLiveClick: () => void this.backToLive(),
      },
      this.selectedBucket,
    );
  }

  /** Scrub semantics: cumulative prefix state at the end of the bucket. */
  async scrubTo(bucket: TimelineBucket): Promise<void> {
    const atMs = (bucket.start_s + this.bucketSpanS) * 1000;
    const cloud = await this.api.state(this.meetingId!, atMs);
    this.selectedBucket = bucket.index;
    this.state.scrubTo(atMs, cloud);
    await this.refreshTimeline();
  }

  async backToLive(): Promise<void> {
    this.selectedBucket = null;
    this.state.backToLive();
    const cloud = await this.api.state(this.meetingId!);
    this.state.resync(cloud);
    await this.refreshTimeline();
  }

  // -- summary view -----------------------------------------------------------

  private async onMeetingEnded(): Promise<void> {
    this.disableControls("The meeting has ended.");
    await this.showSummary();
  }

  async showSummary(): Promise<void> {
    this.stream?.stop();
    this.root.innerHTML = `<div id="summary-view"><p id="summary-status">Waiting for the summary…</p></div>`;
    const container = this.doc.getElementById("summary-view") as HTMLElement;
    for (;;) {
      const report = await this.api.summary(this.meetingId!);
      if (report !== "pending") {
        renderSummary(container, report, this.api, this.selfAttendee);
        return;
      }
      await new Promise((resolve) => setTimeout(resolve, SUMMARY_POLL_MS));
    }
  }

  /** Stop background work (push subscription); used on teardown. */
  dispose(): void {
    this.stream?.stop();
  }
}
