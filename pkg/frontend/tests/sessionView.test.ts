// @vitest-environment jsdom
import { beforeAll, describe, expect, it } from "vitest";
import { renderTranscript } from "../src/sessionView.js";
import type { SessionTranscript } from "../src/types.js";
import { loadFixture } from "./helpers.js";

let transcript: SessionTranscript;

beforeAll(async () => {
  transcript = JSON.parse(await loadFixture("transcript.json"));
});

describe("renderTranscript", () => {
  it("keeps the server turn order", () => {
    const container = document.createElement("div");
    renderTranscript(container, transcript);
    const indices = [...container.querySelectorAll(".turn-card")].map((el) =>
      Number(el.getAttribute("data-turn-index")),
    );
    expect(indices).toEqual(transcript.turns.map((t) => t.index));
  });

  it("budget gauge shows the server totals verbatim", () => {
    const container = document.createElement("div");
    renderTranscript(container, transcript);
    const label = container.querySelector(".budget-label")!;
    expect(label.textContent).toBe(
      `${transcript.total_tokens} / ${transcript.budget_tokens} tokens`,
    );
  });

  it("token costs echo the payload", () => {
    const container = document.createElement("div");
    renderTranscript(container, transcript);
    const costs = [...container.querySelectorAll(".token-cost")].map((el) =>
      el.getAttribute("data-token-cost"),
    );
    expect(costs).toEqual(transcript.turns.map((t) => String(t.token_cost)));
  });

  it("shows a category badge only when the server set one", () => {
    const container = document.createElement("div");
    const withBadge: SessionTranscript = {
      ...transcript,
      turns: [
        { ...transcript.turns[0], category: "HistoricalImageMemory" },
        ...transcript.turns.slice(1),
      ],
    };
    renderTranscript(container, withBadge);
    const badges = container.querySelectorAll(".category-badge");
    expect(badges.length).toBe(1);
    expect(badges[0].textContent).toBe("HistoricalImageMemory");
  });
});
