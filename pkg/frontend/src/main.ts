// Entry point: ?session=<id>&base=<service url> selects the session; with no
// session id a new one is created first.

import { HttpClient } from "./api.js";
import { SessionView } from "./app.js";

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("base") ?? "";
  let sessionId = params.get("session");
  if (!sessionId) {
    const resp = await fetch(`${base}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        mode: params.get("mode") ?? "explainable",
        spec: params.get("spec") ?? "office-week",
        seed: Number(params.get("seed") ?? "1"),
        speedup: Number(params.get("speedup") ?? "60"),
      }),
    });
    if (!resp.ok) {
      document.body.textContent = `could not create session: ${resp.status}`;
      return;
    }
    sessionId = ((await resp.json()) as { session_id: string }).session_id;
  }
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app element");
  }
  const view = new SessionView(root, new HttpClient(base), base, sessionId);
  view.connect();
}

void boot();
