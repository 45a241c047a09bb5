// Browser bootstrap: server base URL from ?server=, a global, or same origin.

import { MeetCuesApp } from "./app.js";

declare global {
  interface Window {
    MEETCUES_SERVER?: string;
    meetcues?: MeetCuesApp;
  }
}

function resolveBaseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("server");
  return fromQuery ?? window.MEETCUES_SERVER ?? window.location.origin;
}

const root = document.getElementById("app");
if (root) {
  const app = new MeetCuesApp(root, resolveBaseUrl());
  window.meetcues = app;
  app.showJoin();
}
