// @vitest-environment jsdom
import { beforeAll, describe, expect, it } from "vitest";
import { GaplessAudioQueue, type AudioSink } from "../src/audioQueue.js";
import { decodeBase64Pcm16 } from "../src/pcm.js";
import { SseParser } from "../src/sse.js";
import { TurnStreamCard } from "../src/streamView.js";
import type { SessionTranscript, WireFrame } from "../src/types.js";
import { loadFixture } from "./helpers.js";

class FakeSink implements AudioSink {
  readonly sampleRate = 24_000;
  currentTime = 0;
  calls: { length: number; when: number }[] = [];
  schedule(samples: Float32Array, when: number): void {
    this.calls.push({ length: samples.length, when });
  }
}

let capturedFrames: WireFrame[];
let transcript: SessionTranscript;

beforeAll(async () => {
  capturedFrames = new SseParser().feed(await loadFixture("turn_stream.sse"));
  transcript = JSON.parse(await loadFixture("transcript.json"));
});

function newCard(tokenByToken = false) {
  const sink = new FakeSink();
  const queue = new GaplessAudioQueue(sink);
  const container = document.createElement("div");
  const card = new TurnStreamCard(container, { audioQueue: queue, tokenByToken });
  return { card, queue, sink, container };
}

describe("TurnStreamCard on a captured server stream", () => {
  it("renders text incrementally, one group per frame", () => {
    const { card } = newCard();
    let previousLength = 0;
    for (const frame of capturedFrames) {
      card.handleFrame(frame);
      if (frame.kind === "text") {
        const text = card.element.querySelector(".turn-text")!.textContent!;
        expect(text.length).toBeGreaterThan(previousLength);
        previousLength = text.length;
      }
    }
    expect(card.state).toBe("done");
    expect(card.element.classList.contains("done")).toBe(true);
  });

  it("matches the persisted assistant turn text exactly", () => {
    const { card } = newCard();
    for (const frame of capturedFrames) card.handleFrame(frame);
    const assistant = transcript.turns.find((t) => t.role === "assistant")!;
    expect(card.text).toBe(assistant.text);
  });

  it("plays all audio chunks; duration sum within 50 ms of the server total", () => {
    const { card, queue, sink } = newCard();
    // Independent total: decode every audio frame straight off the wire.
    let serverTotal = 0;
    let serverChunks = 0;
    for (const frame of capturedFrames) {
      if (frame.kind === "audio") {
        serverTotal += decodeBase64Pcm16(frame.audio_b64!).length / 24_000;
        serverChunks += 1;
      }
    }
    for (const frame of capturedFrames) card.handleFrame(frame);
    expect(card.audioChunks).toBe(serverChunks);
    expect(Math.abs(card.audioSecondsTotal - serverTotal)).toBeLessThanOrEqual(0.05);
    // Gapless: the scheduled span equals the enqueued duration.
    const last = sink.calls.at(-1)!;
    const span = last.when + last.length / sink.sampleRate - sink.calls[0].when;
    expect(Math.abs(span - queue.totalEnqueuedSeconds)).toBeLessThanOrEqual(1 / 24_000);
  });

  it("alternates text and audio frames as emitted by the scheduler", () => {
    const content = capturedFrames.filter((f) => f.kind === "text" || f.kind === "audio");
    content.forEach((f, i) => {
      expect(f.kind).toBe(i % 2 === 0 ? "text" : "audio");
    });
  });
});

describe("TurnStreamCard behavior", () => {
  it("exposes the 5-token grouping with the developer toggle on", () => {
    const { card } = newCard(true);
    card.handleFrame({ seq: 0, kind: "text", text: "a b c d e", final: false });
    const group = card.element.querySelector(".text-group")!;
    expect(group.querySelectorAll(".token").length).toBe(5);
  });

  it("shows an inline banner and marks the turn failed on an error frame", () => {
    const { card } = newCard();
    card.handleFrame({ seq: 0, kind: "text", text: "partial words here now five", final: false });
    card.handleFrame({ seq: 1, kind: "error", text: "speech source failed: boom" });
    card.handleFrame({ seq: 2, kind: "done", final: true });
    expect(card.state).toBe("failed");
    const banner = card.element.querySelector(".error-banner")!;
    expect(banner.textContent).toContain("speech source failed");
    expect(card.element.classList.contains("failed")).toBe(true);
    expect(card.element.classList.contains("done")).toBe(false);
  });
});
