import { describe, expect, it, vi } from "vitest";
import { ApiClient, ApiError } from "../src/api.js";
import type { WireFrame } from "../src/types.js";
import { loadFixture } from "./helpers.js";

function streamResponse(body: string, chunkSize = 97): Response {
  const encoder = new TextEncoder();
  let offset = 0;
  const stream = new ReadableStream<Uint8Array>({
    pull(controller) {
      if (offset >= body.length) {
        controller.close();
        return;
      }
      controller.enqueue(encoder.encode(body.slice(offset, offset + chunkSize)));
      offset += chunkSize;
    },
  });
  return new Response(stream, {
    status: 200,
    headers: { "content-type": "text/event-stream" },
  });
}

describe("ApiClient", () => {
  it("createSession posts the budget and returns the id", async () => {
    const fetchMock = vi.fn(async (url: RequestInfo | URL, init?: RequestInit) => {
      expect(String(url)).toBe("http://svc/v1/sessions");
      expect(JSON.parse(String(init?.body))).toEqual({ budget_tokens: 2048 });
      return Response.json({ id: "s1", budget_tokens: 2048 });
    });
    const client = new ApiClient("http://svc", fetchMock as unknown as typeof fetch);
    const created = await client.createSession(2048);
    expect(created.id).toBe("s1");
  });

  it("postTurn streams frames in order from a chunked body", async () => {
    const body = await loadFixture("turn_stream.sse");
    const fetchMock = vi.fn(async (url: RequestInfo | URL, init?: RequestInit) => {
      expect(String(url)).toBe("/v1/sessions/s1/turns");
      expect(init?.body).toBeInstanceOf(FormData);
      const form = init?.body as FormData;
      expect(form.get("text")).toBe("hi there");
      return streamResponse(body, 61);
    });
    const client = new ApiClient("", fetchMock as unknown as typeof fetch);
    const frames: WireFrame[] = [];
    await client.postTurn("s1", { text: "hi there" }, (f) => frames.push(f));
    expect(frames.length).toBeGreaterThan(2);
    expect(frames.map((f) => f.seq)).toEqual(frames.map((_, i) => i));
    expect(frames.at(-1)!.kind).toBe("done");
  });

  it("raises ApiError with the server detail on 4xx", async () => {
    const fetchMock = vi.fn(async () =>
      Response.json({ detail: "unknown session nope" }, { status: 404 }),
    );
    const client = new ApiClient("", fetchMock as unknown as typeof fetch);
    await expect(client.getSession("nope")).rejects.toMatchObject({
      status: 404,
      message: "unknown session nope",
    });
    await expect(client.getSession("nope")).rejects.toBeInstanceOf(ApiError);
  });

  it("getBenchRun returns the parsed status payload", async () => {
    const fetchMock = vi.fn(async () =>
      Response.json({ run_id: "r1", status: "running", progress: { completed: 1, total: 4 } }),
    );
    const client = new ApiClient("", fetchMock as unknown as typeof fetch);
    const run = await client.getBenchRun("r1");
    expect(run.status).toBe("running");
    expect(run.progress).toEqual({ completed: 1, total: 4 });
  });
});
