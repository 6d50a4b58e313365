// Thin fetch wrapper for the response endpoint (the only mutating call the
// UI makes).

import type { ApiClient, ResponseChoice, ResponseResult } from "./types.js";

export class HttpClient implements ApiClient {
  constructor(private baseUrl: string) {}

  async respond(sessionId: string, recId: string,
                response: ResponseChoice): Promise<ResponseResult> {
    const resp = await fetch(
      `${this.baseUrl}/sessions/${sessionId}/recommendations/${recId}/response`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ response }),
      },
    );
    if (resp.ok) {
      return { ok: true, status: resp.status };
    }
    let detail = resp.statusText;
    try {
      detail = ((await resp.json()) as { detail?: string }).detail ?? detail;
    } catch {
      // non-JSON error body: keep the status text
    }
    return { ok: false, status: resp.status, detail };
  }
}
