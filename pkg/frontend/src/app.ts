// Session view: context panel, the card feed and the end-of-session stats.
// All state changes arrive through the event stream; button presses only
// ever POST the response and wait for the stream to confirm.

import { RecommendationCard } from "./card.js";
import { SessionStream, type EventSourceFactory } from "./stream.js";
import type {
  ApiClient,
  CountdownTick,
  LogEvent,
  ReadingBatch,
  Recommendation,
  ResponseChoice,
  SessionStats,
  StructuredMessage,
} from "./types.js";

const ACK_LABEL = "turn-off signal sent to";
const NOOP_LABEL = "was already off:";

export class SessionView {
  private cards = new Map<string, RecommendationCard>();
  private stream: SessionStream | null = null;
  private contextEl: HTMLElement;
  private feedEl: HTMLElement;
  private statsEl: HTMLElement;
  private statusEl: HTMLElement;
  private doc: Document;

  constructor(private root: HTMLElement, private client: ApiClient,
              private baseUrl: string, private sessionId: string) {
    this.doc = root.ownerDocument;
    this.statusEl = this.section("session-status");
    this.contextEl = this.section("context-panel");
    this.feedEl = this.section("card-feed");
    this.statsEl = this.section("session-stats");
  }

  private section(id: string): HTMLElement {
    const el = this.doc.createElement("section");
    el.id = id;
    this.root.appendChild(el);
    return el;
  }

  connect(factory?: EventSourceFactory): void {
    this.stream = new SessionStream(this.baseUrl, this.sessionId, {
      onEvent: (ev) => this.handleEvent(ev),
      onTick: (tick) => this.handleTick(tick),
      onEnd: (status) => this.setStatus(`session ${status}`),
      onReconnect: (attempt) => this.setStatus(`reconnecting (${attempt})...`),
    }, ...(factory ? [factory] : []));
    this.stream.start();
  }

  disconnect(): void {
    this.stream?.close();
  }

  setStatus(text: string): void {
    this.statusEl.textContent = text;
  }

  handleEvent(ev: LogEvent): void {
    switch (ev.kind) {
      case "session_started": {
        const mode = ev.data["mode"] as string;
        this.setStatus(`session ${ev.data["session_id"]} (${mode}) running`);
        break;
      }
      case "reading_ingested":
        this.renderContext(ev.data as unknown as ReadingBatch);
        break;
      case "recommendation_issued": {
        const rec = ev.data["rec"] as unknown as Recommendation;
        const message = ev.data["message"] as unknown as StructuredMessage;
        const card = new RecommendationCard(rec, message, {
          respond: (recId, response) => void this.respond(recId, response),
        }, this.doc);
        this.cards.set(rec.id, card);
        this.feedEl.prepend(card.el);
        break;
      }
      case "response_recorded": {
        const card = this.cards.get(ev.data["rec_id"] as string);
        const response = ev.data["response"] as string;
        card?.markResolved(response === "ignore" ? "ignored" : `${response}ed`);
        break;
      }
      case "actuation_applied": {
        const card = this.cards.get(ev.data["rec_id"] as string);
        const appliance = ev.data["appliance_id"] as string;
        const ok = ev.data["status"] === "ok";
        card?.addAck(ok ? `${ACK_LABEL} ${appliance}` : `${NOOP_LABEL} ${appliance}`);
        break;
      }
      case "session_finished":
        this.renderStats(ev.data["stats"] as unknown as SessionStats);
        break;
      default:
        break; // micro-moments and profile updates have no view
    }
  }

  handleTick(tick: CountdownTick): void {
    this.cards.get(tick.rec_id)?.setCountdown(tick.remaining_s);
  }

  async respond(recId: string, response: ResponseChoice): Promise<void> {
    const card = this.cards.get(recId);
    try {
      const result = await this.client.respond(this.sessionId, recId, response);
      if (!result.ok && card) {
        card.noteConflict(result.detail ?? `error ${result.status}`);
      }
    } catch {
      card?.reenable();
      this.setStatus("response failed to send; try again");
    }
  }

  private renderContext(batch: ReadingBatch): void {
    this.contextEl.textContent = "";
    const rows: Array<[string, string]> = [
      ["indoor", `${round1(batch.indoor_temp)} C, ${Math.round(batch.indoor_lux)} lux`],
      ["outdoor", `${round1(batch.outdoor_temp)} C, ${Math.round(batch.outdoor_lux)} lux`],
      ["presence", batch.motion ? "occupied" : "empty"],
    ];
    for (const [id, kw] of Object.entries(batch.power)) {
      rows.push([id, kw > 0 ? `on (${kw} kW)` : "off"]);
    }
    for (const [label, value] of rows) {
      const row = this.doc.createElement("div");
      row.className = "context-row";
      row.dataset.field = label;
      row.textContent = `${label}: ${value}`;
      this.contextEl.appendChild(row);
    }
  }

  private renderStats(stats: SessionStats): void {
    this.statsEl.textContent = "";
    const title = this.doc.createElement("h2");
    title.textContent = "Session results";
    this.statsEl.appendChild(title);
    const table = this.doc.createElement("table");
    table.dataset.testid = "stats";
    const rows: Array<[string, string]> = [
      ["issued", String(stats.issued)],
      ["accepted", String(stats.accepted)],
      ["rejected", String(stats.rejected)],
      ["ignored", String(stats.ignored)],
      ["acceptance ratio", stats.acceptance_ratio === null
        ? "n/a" : stats.acceptance_ratio.toFixed(3)],
      ["ignored fraction", stats.ignored_fraction === null
        ? "n/a" : stats.ignored_fraction.toFixed(3)],
      ["kWh metered", stats.kwh_consumed.toFixed(2)],
      ["kWh quoted in facts", stats.kwh_claimed.toFixed(2)],
    ];
    for (const [label, value] of rows) {
      const tr = this.doc.createElement("tr");
      const th = this.doc.createElement("th");
      th.textContent = label;
      const td = this.doc.createElement("td");
      td.dataset.stat = label;
      td.textContent = value;
      tr.appendChild(th);
      tr.appendChild(td);
      table.appendChild(tr);
    }
    this.statsEl.appendChild(table);
  }
}

function round1(x: number): number {
  return Math.round(x * 10) / 10;
}
