import type { SessionTranscript, TurnInfo } from "./types.js";

// All numbers on turn cards and the budget gauge come from the server
// transcript payload, rendered verbatim.

export function renderTranscript(container: HTMLElement, transcript: SessionTranscript): void {
  const doc = container.ownerDocument;
  container.textContent = "";

  const gauge = doc.createElement("div");
  gauge.className = "budget-gauge";
  const label = doc.createElement("span");
  label.className = "budget-label";
  label.textContent = `${transcript.total_tokens} / ${transcript.budget_tokens} tokens`;
  const bar = doc.createElement("div");
  bar.className = "budget-bar";
  const fill = doc.createElement("div");
  fill.className = "budget-fill";
  const pct = Math.min(100, (100 * transcript.total_tokens) / transcript.budget_tokens);
  fill.style.width = `${pct}%`;
  bar.appendChild(fill);
  gauge.appendChild(label);
  gauge.appendChild(bar);
  container.appendChild(gauge);

  const list = doc.createElement("div");
  list.className = "turn-list";
  for (const turn of transcript.turns) {
    list.appendChild(renderTurnCard(doc, turn));
  }
  container.appendChild(list);
}

function renderTurnCard(doc: Document, turn: TurnInfo): HTMLElement {
  const card = doc.createElement("article");
  card.className = `turn-card ${turn.role}`;
  card.setAttribute("data-turn-index", String(turn.index));

  const head = doc.createElement("header");
  const role = doc.createElement("span");
  role.className = "role";
  role.textContent = turn.role;
  head.appendChild(role);
  if (turn.category) {
    const badge = doc.createElement("span");
    badge.className = "category-badge";
    badge.textContent = turn.category;
    head.appendChild(badge);
  }
  const cost = doc.createElement("span");
  cost.className = "token-cost";
  cost.setAttribute("data-token-cost", String(turn.token_cost));
  cost.textContent = `${turn.token_cost} tok`;
  head.appendChild(cost);
  card.appendChild(head);

  const text = doc.createElement("p");
  text.className = "turn-text";
  text.textContent = turn.text;
  card.appendChild(text);

  if (turn.media.length > 0) {
    const media = doc.createElement("div");
    media.className = "media-chips";
    for (const chip of turn.media) {
      const el = doc.createElement("span");
      el.className = `media-chip ${chip.kind}`;
      el.textContent = `${chip.kind}:${chip.media_id.slice(0, 8)}`;
      media.appendChild(el);
    }
    card.appendChild(media);
  }
  return card;
}
