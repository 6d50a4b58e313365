// Recommendation card: renders exactly the sections present in the
// structured message (mode fidelity is enforced server-side; the card simply
// never invents a section), runs the server-driven countdown and exposes the
// Accept/Reject buttons.

import type { Recommendation, ResponseChoice, StructuredMessage } from "./types.js";

export interface CardCallbacks {
  respond(recId: string, response: ResponseChoice): void;
}

export class RecommendationCard {
  readonly el: HTMLElement;
  private buttons: HTMLButtonElement[] = [];
  private countdownEl: HTMLElement;
  private statusEl: HTMLElement;
  private resolved = false;

  constructor(private rec: Recommendation, message: StructuredMessage,
              callbacks: CardCallbacks, doc: Document = document) {
    this.el = doc.createElement("article");
    this.el.className = "card";
    this.el.dataset.recId = rec.id;
    this.el.dataset.mode = message.mode;

    const head = doc.createElement("header");
    head.textContent = message.timestamp;
    this.el.appendChild(head);

    if (message.context !== null) {
      const ctx = doc.createElement("dl");
      ctx.className = "context";
      ctx.dataset.testid = "context";
      const entries: Array<[string, string]> = [
        ["indoor", `${message.context.indoor_temp} C / ${message.context.indoor_lux} lux`],
        ["outdoor", `${message.context.outdoor_temp} C / ${message.context.outdoor_lux} lux`],
        ["presence", message.context.occupied ? "occupied" : "empty"],
      ];
      for (const [label, value] of entries) {
        const dt = doc.createElement("dt");
        dt.textContent = label;
        const dd = doc.createElement("dd");
        dd.textContent = value;
        ctx.appendChild(dt);
        ctx.appendChild(dd);
      }
      this.el.appendChild(ctx);
    }
    if (message.reason !== null) {
      const reason = doc.createElement("p");
      reason.className = "reason";
      reason.dataset.testid = "reason";
      reason.textContent = message.reason;
      this.el.appendChild(reason);
    }
    if (message.fact !== null) {
      const fact = doc.createElement("p");
      fact.className = "fact";
      fact.dataset.testid = "fact";
      fact.textContent = message.fact;
      this.el.appendChild(fact);
    }

    const prompt = doc.createElement("p");
    prompt.className = "prompt";
    prompt.dataset.testid = "prompt";
    prompt.textContent = message.prompt;
    this.el.appendChild(prompt);

    const actions = doc.createElement("div");
    actions.className = "actions";
    for (const option of message.options) {
      if (option !== "accept" && option !== "reject") {
        continue;
      }
      const button = doc.createElement("button");
      button.textContent = option;
      button.dataset.testid = `btn-${option}`;
      button.addEventListener("click", () => {
        if (this.resolved || button.disabled) {
          return;
        }
        this.setButtonsDisabled(true);
        callbacks.respond(this.rec.id, option);
      });
      this.buttons.push(button);
      actions.appendChild(button);
    }
    this.countdownEl = doc.createElement("span");
    this.countdownEl.className = "countdown";
    this.countdownEl.dataset.testid = "countdown";
    actions.appendChild(this.countdownEl);
    this.el.appendChild(actions);

    this.statusEl = doc.createElement("p");
    this.statusEl.className = "status";
    this.statusEl.dataset.testid = "status";
    this.el.appendChild(this.statusEl);
  }

  get recId(): string {
    return this.rec.id;
  }

  setCountdown(remainingS: number): void {
    if (this.resolved) {
      return;
    }
    this.countdownEl.textContent = `${remainingS}s`;
    if (remainingS <= 0) {
      this.setButtonsDisabled(true);
    }
  }

  /** Server said the window elapsed (or already resolved): surface it. */
  noteConflict(detail: string): void {
    this.statusEl.textContent = detail;
    this.setButtonsDisabled(true);
  }

  /** Allow retrying after a transport (not protocol) failure. */
  reenable(): void {
    if (!this.resolved) {
      this.setButtonsDisabled(false);
    }
  }

  markResolved(lifecycle: string): void {
    this.resolved = true;
    this.setButtonsDisabled(true);
    this.el.classList.add("resolved", lifecycle);
    this.statusEl.textContent = lifecycle;
    this.countdownEl.textContent = "";
  }

  addAck(text: string): void {
    const ack = this.el.ownerDocument.createElement("p");
    ack.className = "ack";
    ack.dataset.testid = "ack";
    ack.textContent = text;
    this.el.appendChild(ack);
  }

  private setButtonsDisabled(disabled: boolean): void {
    for (const button of this.buttons) {
      button.disabled = disabled;
    }
  }
}
