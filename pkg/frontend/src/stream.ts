// Resumable subscription to a session's server-sent event stream.
//
// Log events carry their sequence number as the SSE id; on any drop we
// reconnect with ?after=<last seen seq> so nothing is lost or duplicated.
// The EventSource constructor is injectable so tests can feed a scripted
// stream.

import type { CountdownTick, LogEvent } from "./types.js";

export const LOG_EVENT_KINDS = [
  "session_started",
  "reading_ingested",
  "micro_moment_detected",
  "recommendation_issued",
  "response_recorded",
  "actuation_applied",
  "profile_updated",
  "session_finished",
] as const;

export interface SseMessage {
  data: string;
}

export interface EventSourceLike {
  addEventListener(type: string, listener: (ev: SseMessage) => void): void;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export interface StreamHandlers {
  onEvent(ev: LogEvent): void;
  onTick?(tick: CountdownTick): void;
  onEnd?(status: string): void;
  onReconnect?(attempt: number): void;
}

export class SessionStream {
  private source: EventSourceLike | null = null;
  private lastSeq = 0;
  private attempts = 0;
  private closed = false;

  constructor(
    private baseUrl: string,
    private sessionId: string,
    private handlers: StreamHandlers,
    private factory: EventSourceFactory = (url) => new EventSource(url) as EventSourceLike,
    private reconnectDelayMs = 1000,
  ) {}

  start(): void {
    this.closed = false;
    this.connect();
  }

  private url(): string {
    return `${this.baseUrl}/sessions/${this.sessionId}/events?after=${this.lastSeq}`;
  }

  private connect(): void {
    const source = this.factory(this.url());
    this.source = source;
    for (const kind of LOG_EVENT_KINDS) {
      source.addEventListener(kind, (msg) => this.onLogEvent(msg));
    }
    source.addEventListener("tick", (msg) => {
      this.handlers.onTick?.(JSON.parse(msg.data) as CountdownTick);
    });
    source.addEventListener("end", (msg) => {
      const status = (JSON.parse(msg.data) as { status: string }).status;
      this.close();
      this.handlers.onEnd?.(status);
    });
    source.addEventListener("error", () => this.onDrop());
  }

  private onLogEvent(msg: SseMessage): void {
    const ev = JSON.parse(msg.data) as LogEvent;
    if (ev.seq <= this.lastSeq) {
      return; // duplicate after a racy reconnect
    }
    this.lastSeq = ev.seq;
    this.attempts = 0;
    this.handlers.onEvent(ev);
  }

  private onDrop(): void {
    if (this.closed) {
      return;
    }
    this.source?.close();
    this.source = null;
    this.attempts += 1;
    this.handlers.onReconnect?.(this.attempts);
    const delay = Math.min(this.reconnectDelayMs * 2 ** (this.attempts - 1), 15000);
    setTimeout(() => {
      if (!this.closed) {
        this.connect();
      }
    }, delay);
  }

  close(): void {
    this.closed = true;
    this.source?.close();
    this.source = null;
  }
}
