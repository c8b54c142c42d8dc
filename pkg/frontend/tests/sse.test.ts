import { describe, expect, it } from "vitest";
import { SseParser } from "../src/sse.js";
import { loadFixture } from "./helpers.js";

const frame = (seq: number, kind: string, extra = "") =>
  `event: frame\ndata: {"seq": ${seq}, "kind": "${kind}"${extra}}\n\n`;

describe("SseParser", () => {
  it("parses complete frames in order", () => {
    const parser = new SseParser();
    const frames = parser.feed(frame(0, "text", ', "text": "hi"') + frame(1, "done"));
    expect(frames.map((f) => f.seq)).toEqual([0, 1]);
    expect(frames[0].text).toBe("hi");
    expect(parser.pending).toBe("");
  });

  it("buffers frames split across network reads", () => {
    const parser = new SseParser();
    const whole = frame(0, "text", ', "text": "split across reads"');
    const first = parser.feed(whole.slice(0, 17));
    expect(first).toEqual([]);
    const second = parser.feed(whole.slice(17) + frame(1, "done").slice(0, 5));
    expect(second.length).toBe(1);
    expect(second[0].text).toBe("split across reads");
    const third = parser.feed(frame(1, "done").slice(5));
    expect(third.length).toBe(1);
    expect(third[0].kind).toBe("done");
  });

  it("ignores comment keepalives and unknown events", () => {
    const parser = new SseParser();
    const frames = parser.feed(": keepalive\n\nevent: other\ndata: {}\n\n" + frame(0, "done"));
    expect(frames.length).toBe(1);
    expect(frames[0].kind).toBe("done");
  });

  it("handles a real captured stream", async () => {
    const body = await loadFixture("turn_stream.sse");
    const parser = new SseParser();
    const frames = parser.feed(body);
    expect(frames.length).toBeGreaterThan(2);
    expect(frames.at(-1)!.kind).toBe("done");
    expect(frames.map((f) => f.seq)).toEqual(frames.map((_, i) => i));
  });
});
