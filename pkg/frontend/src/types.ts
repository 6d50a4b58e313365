// Payload shapes mirrored from the service API (docs/api.md). The UI never
// invents content: everything rendered comes from these payloads or from
// static labels.

export type Mode = "plain" | "persuasive" | "explainable";
export type ResponseChoice = "accept" | "reject";

export interface ContextBlock {
  indoor_temp: number;
  outdoor_temp: number;
  indoor_lux: number;
  outdoor_lux: number;
  occupied: boolean;
}

export interface StructuredMessage {
  mode: Mode;
  timestamp: string;
  prompt: string;
  context: ContextBlock | null;
  reason: string | null;
  fact: string | null;
  options: string[];
}

export interface Recommendation {
  id: string;
  created_at: number;
  appliance_id: string;
  action: string;
  mode: Mode;
  deadline: number;
  automated: boolean;
}

export interface LogEvent {
  v: number;
  seq: number;
  t: number;
  kind: string;
  data: Record<string, unknown>;
}

export interface ReadingBatch {
  outdoor_temp: number;
  outdoor_lux: number;
  indoor_temp: number;
  indoor_lux: number;
  motion: number;
  power: Record<string, number>;
}

export interface CountdownTick {
  rec_id: string;
  remaining_s: number;
}

export interface SessionStats {
  issued: number;
  accepted: number;
  rejected: number;
  ignored: number;
  acceptance_ratio: number | null;
  ignored_fraction: number | null;
  kwh_consumed: number;
  kwh_claimed: number;
}

export interface ResponseResult {
  ok: boolean;
  status: number;
  detail?: string;
}

export interface ApiClient {
  respond(sessionId: string, recId: string, response: ResponseChoice): Promise<ResponseResult>;
}
