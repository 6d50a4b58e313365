// Scripted stand-ins for the event stream and the response endpoint.

import type { EventSourceLike, SseMessage } from "../src/stream.js";
import type {
  ApiClient,
  LogEvent,
  Recommendation,
  ResponseChoice,
  ResponseResult,
  StructuredMessage,
} from "../src/types.js";

export class MockEventSource implements EventSourceLike {
  listeners = new Map<string, Array<(m: SseMessage) => void>>();
  closed = false;

  constructor(public url: string) {}

  addEventListener(type: string, listener: (m: SseMessage) => void): void {
    const bucket = this.listeners.get(type) ?? [];
    bucket.push(listener);
    this.listeners.set(type, bucket);
  }

  emit(type: string, payload: unknown): void {
    for (const listener of this.listeners.get(type) ?? []) {
      listener({ data: JSON.stringify(payload) });
    }
  }

  close(): void {
    this.closed = true;
  }
}

export class MockStreamFactory {
  instances: MockEventSource[] = [];

  factory = (url: string): EventSourceLike => {
    const source = new MockEventSource(url);
    this.instances.push(source);
    return source;
  };

  get current(): MockEventSource {
    return this.instances[this.instances.length - 1];
  }
}

export class RecordingClient implements ApiClient {
  calls: Array<{ sessionId: string; recId: string; response: ResponseChoice }> = [];
  nextResult: ResponseResult = { ok: true, status: 200 };

  async respond(sessionId: string, recId: string,
                response: ResponseChoice): Promise<ResponseResult> {
    this.calls.push({ sessionId, recId, response });
    return this.nextResult;
  }
}

let seq = 0;

export function resetSeq(): void {
  seq = 0;
}

export function logEvent(kind: string, data: Record<string, unknown>, t = 28800): LogEvent {
  seq += 1;
  return { v: 1, seq, t, kind, data };
}

export function recommendation(id: string, mode: StructuredMessage["mode"]): Recommendation {
  return {
    id,
    created_at: 28920,
    appliance_id: "ac",
    action: "turn_off",
    mode,
    deadline: 28940,
    automated: false,
  };
}

export function message(mode: StructuredMessage["mode"]): StructuredMessage {
  const full = mode === "explainable";
  const withFact = mode !== "plain";
  return {
    mode,
    timestamp: "Monday 08:02",
    prompt: "Turn off the A/C?",
    context: full
      ? { indoor_temp: 26.4, outdoor_temp: 21.9, indoor_lux: 1050, outdoor_lux: 13017,
          occupied: true }
      : null,
    reason: full ? "The room has been unoccupied for 6 minutes but the A/C is still running."
                 : null,
    fact: withFact ? "Since Monday 08:00 the A/C has used about 9.6 kWh, costing about 1.58 € so far."
                   : null,
    options: ["accept", "reject"],
  };
}

export function readings(): Record<string, unknown> {
  return {
    outdoor_temp: 21.9, outdoor_lux: 13017.4, indoor_temp: 26.44, indoor_lux: 1050.9,
    motion: 1, power: { ac: 3.2, lights: 0.12, monitor: 0 },
  };
}
