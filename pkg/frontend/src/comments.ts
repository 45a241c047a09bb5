// Comment list with chrono/popularity toggle and upvote controls. Order is
// always whatever the server returned; the client never re-sorts.

import type { CommentEntry, CommentOrder } from "./types.js";

export interface CommentHandlers {
  onUpvote: (commentId: string) => void;
  onToggleOrder: (order: CommentOrder) => void;
}

export function renderComments(
  container: HTMLElement,
  entries: CommentEntry[],
  order: CommentOrder,
  handlers: CommentHandlers,
  interactive = true,
): void {
  container.textContent = "";
  const doc = container.ownerDocument;
  const toggle = doc.createElement("div");
  toggle.className = "order-toggle";
  for (const choice of ["chrono", "popularity"] as CommentOrder[]) {
    const button = doc.createElement("button");
    button.textContent = choice;
    button.className = choice === order ? "active" : "";
    button.dataset.order = choice;
    button.addEventListener("click", () => handlers.onToggleOrder(choice));
    toggle.appendChild(button);
  }
  container.appendChild(toggle);
  const list = doc.createElement("ol");
  list.className = "comments";
  for (const entry of entries) {
    const item = doc.createElement("li");
    item.dataset.commentId = entry.comment_id;
    const votes = doc.createElement("button");
    votes.className = "upvote";
    votes.textContent = `▲ ${entry.upvotes}`;
    votes.disabled = !interactive;
    votes.addEventListener("click", () => handlers.onUpvote(entry.comment_id));
    const text = doc.createElement("span");
    text.className = "comment-text";
    text.textContent = entry.text;
    item.appendChild(votes);
    item.appendChild(text);
    list.appendChild(item);
  }
  container.appendChild(list);
}
